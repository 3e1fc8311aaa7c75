#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>

#include "uma/data.hpp"
#include "uma/metrics.hpp"
#include "uma/noise.hpp"
#include "uma/rng.hpp"
#include "uma/unconfused.hpp"

using namespace uma;

namespace {

Dataset tiny(std::initializer_list<std::initializer_list<double>> rows, std::vector<int> labels,
             int q) {
    DenseMatrix m(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index i = 0;
    for (const auto& r : rows) {
        Eigen::Index j = 0;
        for (double v : r) m(i, j++) = v;
        ++i;
    }
    Dataset d;
    d.features = FeatureMatrix(std::move(m));
    d.observed = std::move(labels);
    d.num_classes = q;
    return d;
}

UpdateCandidate cand(int p, int q, double norm) {
    UpdateCandidate c;
    c.p = p;
    c.q = q;
    c.z = Eigen::VectorXd::Constant(2, norm / std::sqrt(2.0));
    c.norm = norm;
    return c;
}

} // namespace

TEST_CASE("region under zero weights") {
    Dataset d = tiny({{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}}, {0, 1, 2}, 3);
    const WeightMatrix w = WeightMatrix::zeros(2, 3);
    for (int p = 0; p < 3; ++p) {
        CHECK(region(w, d, p, 0.0) == std::vector<Eigen::Index>{0, 1, 2});
        CHECK(region(w, d, p, 0.5).empty());
    }
    CHECK_THROWS_AS(region(w, d, 3, 0.0), InputError);
}

TEST_CASE("region separates two opposite prototypes") {
    Dataset d = tiny({{1.0, 0.0}, {-1.0, 0.0}}, {0, 1}, 2);
    DenseMatrix m(2, 2);
    m.col(0) = Eigen::Vector2d(1.0, 0.0);
    m.col(1) = Eigen::Vector2d(-1.0, 0.0);
    const WeightMatrix w{m};
    CHECK(region(w, d, 0, 0.0) == std::vector<Eigen::Index>{0});
    CHECK(region(w, d, 1, 0.0) == std::vector<Eigen::Index>{1});
}

TEST_CASE("class moments divide by the full dataset size") {
    Dataset d = tiny({{1.0, 0.0}, {0.0, 1.0}}, {0, 1}, 2);
    const DenseMatrix both = class_moments(d, {0, 1});
    CHECK(both(0, 0) == 0.5);
    CHECK(both(0, 1) == 0.0);
    CHECK(both(1, 0) == 0.0);
    CHECK(both(1, 1) == 0.5);

    Dataset four = tiny({{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}, {0.5, 0.5}}, {2, 2, 0, 1}, 3);
    const DenseMatrix g = class_moments(four, {0, 1});
    CHECK(g.row(2) == Eigen::RowVector2d(0.25, 0.25));
    CHECK(g.row(0).isZero(0.0));
    CHECK(g.row(1).isZero(0.0));

    CHECK(class_moments(four, {}).isZero(0.0));
    CHECK_THROWS_AS(class_moments(four, {9}), InputError);
}

TEST_CASE("identity confusion leaves moments untouched bitwise") {
    Dataset d = tiny({{0.3, -0.4}, {0.1, 0.9}, {-0.7, 0.2}}, {1, 0, 1}, 2);
    const DenseMatrix gamma = class_moments(d, {0, 2});
    const DenseMatrix z = unconfused_updates(gamma, ConfusionMatrix::identity(2));
    CHECK(z == gamma);
}

TEST_CASE("unconfusing recovers the clean class moment") {
    const Eigen::RowVector3d mu(0.2, -0.5, 1.0);
    DenseMatrix gamma(2, 3);
    gamma.row(0) = 0.9 * mu;
    gamma.row(1) = 0.1 * mu;
    DenseMatrix c(2, 2);
    c << 0.9, 0.0, 0.1, 1.0;
    const DenseMatrix z = unconfused_updates(gamma, invert_confusion(c));
    CHECK((z.row(0) - mu).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(z.row(1).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK_THROWS_AS(unconfused_updates(DenseMatrix::Zero(3, 2), invert_confusion(c)), InputError);
}

TEST_CASE("unconfused updates concentrate around true-label moments") {
    // known concept, known mid-family confusion, large sample
    const std::uint64_t seed = 31;
    auto [data, wstar] = generate_synthetic(10, 30000, 0.025, seed);
    DenseMatrix ref = 0.7 * DenseMatrix::Identity(10, 10);
    Rng mrng(derive_seed(seed, 0, 0, 1));
    for (Eigen::Index i = 0; i < 10; ++i) {
        Eigen::VectorXd extra(10);
        for (Eigen::Index j = 0; j < 10; ++j) extra[j] = mrng.uniform01();
        ref.row(i) += 0.3 * extra.transpose() / extra.sum();
    }
    const NoiseFamily family{ref, (ref - DenseMatrix::Identity(10, 10)) / 10.0};
    const ConfusionMatrix c = confusion_at(family, 10);
    Rng crng(derive_seed(seed, 0, 0, 3));
    Dataset noisy = with_observed(data, corrupt_labels(*data.truth, c, crng));

    const Eigen::Index n = noisy.n();
    for (int p = 0; p < 10; p += 3) {
        const auto idx = region(wstar, noisy, p, 0.0);
        if (idx.empty()) continue;
        const DenseMatrix z = unconfused_updates(class_moments(noisy, idx), c);
        DenseMatrix oracle = DenseMatrix::Zero(10, 2);
        for (Eigen::Index i : idx)
            oracle.row((*noisy.truth)[static_cast<std::size_t>(i)]) +=
                noisy.features.row_dense(i).transpose() / static_cast<double>(n);
        for (int q = 0; q < 10; ++q)
            CHECK((z.row(q) - oracle.row(q)).norm() <= 0.05);
    }
}

TEST_CASE("priors under identity are label frequencies") {
    Dataset d = tiny({{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}, {0.5, 0.5}}, {0, 0, 0, 1}, 2);
    const Eigen::VectorXd pri = estimate_priors(d, ConfusionMatrix::identity(2));
    CHECK(pri[0] == 0.75);
    CHECK(pri[1] == 0.25);
}

TEST_CASE("priors unconfuse observed counts") {
    Dataset d = tiny({{1.0, 0.0}}, {0}, 2);
    std::vector<int> labels;
    DenseMatrix pts(100, 2);
    for (int i = 0; i < 100; ++i) {
        pts.row(i) = Eigen::RowVector2d(1.0, 0.0);
        labels.push_back(i < 60 ? 0 : 1);
    }
    Dataset big;
    big.features = FeatureMatrix(std::move(pts));
    big.observed = std::move(labels);
    big.num_classes = 2;
    DenseMatrix c(2, 2);
    c << 0.9, 0.2, 0.1, 0.8;
    const Eigen::VectorXd pri = estimate_priors(big, invert_confusion(c));
    CHECK(pri[0] == doctest::Approx(4.0 / 7.0).epsilon(1e-12));
    CHECK(pri[1] == doctest::Approx(3.0 / 7.0).epsilon(1e-12));
    CHECK(pri.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("priors are clamped away from zero") {
    DenseMatrix pts(10, 2);
    std::vector<int> labels(10, 0);
    pts.setOnes();
    Dataset d;
    d.features = FeatureMatrix(std::move(pts));
    d.observed = std::move(labels);
    d.num_classes = 2;
    DenseMatrix c(2, 2);
    c << 0.6, 0.4, 0.4, 0.6; // inverse has large negative entries
    const Eigen::VectorXd pri = estimate_priors(d, invert_confusion(c));
    CHECK(pri[0] == 1.0);
    CHECK(pri[1] == 1e-6);
}

TEST_CASE("selection strategies") {
    Rng rng(5);
    const Eigen::VectorXd pri = (Eigen::VectorXd(2) << 0.8, 0.2).finished();

    SUBCASE("error picks the largest norm") {
        const std::vector<UpdateCandidate> cs = {cand(0, 1, 0.2), cand(1, 0, 0.5)};
        const auto sel = select_pair(cs, SelectionStrategy::error, pri, rng);
        REQUIRE(sel.has_value());
        CHECK(*sel == std::make_pair(1, 0));
    }
    SUBCASE("confusion divides by the target prior") {
        const std::vector<UpdateCandidate> cs = {cand(0, 1, 0.4), cand(1, 0, 0.3)};
        // 0.4 / 0.2 = 2.0 beats 0.3 / 0.8 = 0.375
        const auto sel = select_pair(cs, SelectionStrategy::confusion, pri, rng);
        REQUIRE(sel.has_value());
        CHECK(*sel == std::make_pair(0, 1));
    }
    SUBCASE("all-zero norms mean no useful update") {
        const std::vector<UpdateCandidate> cs = {cand(0, 1, 0.0), cand(1, 0, 0.0)};
        CHECK_FALSE(select_pair(cs, SelectionStrategy::error, pri, rng).has_value());
        CHECK_FALSE(select_pair(cs, SelectionStrategy::random, pri, rng).has_value());
        CHECK_FALSE(select_pair({}, SelectionStrategy::error, pri, rng).has_value());
    }
    SUBCASE("ties break to the lexicographically smallest pair") {
        const std::vector<UpdateCandidate> cs = {cand(1, 0, 0.5), cand(0, 2, 0.5)};
        const auto sel = select_pair(cs, SelectionStrategy::error, pri, rng);
        REQUIRE(sel.has_value());
        CHECK(*sel == std::make_pair(0, 2));
    }
    SUBCASE("random is uniform over positive-norm candidates") {
        const std::vector<UpdateCandidate> cs = {cand(0, 1, 1.0), cand(1, 0, 1.0),
                                                 cand(2, 0, 0.0)};
        std::map<std::pair<int, int>, int> hits;
        for (int i = 0; i < 10000; ++i) {
            const auto sel = select_pair(cs, SelectionStrategy::random, pri, rng);
            REQUIRE(sel.has_value());
            ++hits[*sel];
        }
        CHECK(hits.count(std::make_pair(2, 0)) == 0);
        CHECK(hits[std::make_pair(0, 1)] > 4500);
        CHECK(hits[std::make_pair(1, 0)] > 4500);
    }
}

TEST_CASE("first update vector matches the public moment pipeline bitwise") {
    auto [data, wstar] = generate_synthetic(5, 200, 0.05, 77);
    const ConfusionMatrix ident = ConfusionMatrix::identity(5);
    const WeightMatrix zeros = WeightMatrix::zeros(2, 5);

    UpdateCandidate first;
    bool got = false;
    UmaConfig cfg;
    cfg.max_updates = 1;
    train_uma(data, ident, cfg, [&](long, const UpdateCandidate& c, const WeightMatrix&) {
        if (!got) {
            first = c;
            got = true;
        }
    });
    REQUIRE(got);
    const DenseMatrix gamma = class_moments(data, region(zeros, data, first.p, 0.0));
    const DenseMatrix z = unconfused_updates(gamma, ident);
    CHECK(first.z == z.row(first.q).transpose());
}

TEST_CASE("one isolated point is learned in one update, then no update helps") {
    Dataset d = tiny({{0.8, 0.6}}, {0}, 2);
    UmaConfig cfg;
    const auto [w, stats] = train_uma(d, ConfusionMatrix::identity(2), cfg);
    CHECK(stats.updates == 1);
    CHECK(stats.converged);
    CHECK(predict(w, Eigen::Vector2d(0.8, 0.6)) == 0);
}

TEST_CASE("a selected vector below stop_epsilon halts before any update") {
    Dataset d = tiny({{8e-5, 6e-5}}, {0}, 2); // norm 1e-4 < 1e-3
    UmaConfig cfg;
    const auto [w, stats] = train_uma(d, ConfusionMatrix::identity(2), cfg);
    CHECK(stats.updates == 0);
    CHECK(stats.converged);
    CHECK(stats.final_update_norm == doctest::Approx(1e-4).epsilon(1e-9));
    CHECK(w.m.isZero(0.0));
}

TEST_CASE("clean data with identity confusion reaches zero training error") {
    for (std::uint64_t seed = 120; seed < 130; ++seed) {
        auto [data, wstar] = generate_synthetic(10, 1000, 0.025, seed);
        UmaConfig cfg;
        const auto [w, stats] = train_uma(data, ConfusionMatrix::identity(10), cfg);
        CAPTURE(seed);
        CHECK(stats.converged);
        CHECK(stats.updates < cfg.max_updates);
        CHECK(error_rate(predict_all(w, data.features), *data.truth) == 0.0);

        const double theta = dataset_margin(wstar, data.features, *data.truth);
        REQUIRE(theta >= 0.025);
        CHECK(static_cast<double>(stats.updates) <= 8.0 / (theta * theta));
    }
}

TEST_CASE("update budget is enforced and reported") {
    auto [data, wstar] = generate_synthetic(10, 400, 0.025, 9);
    Rng frng(derive_seed(9, 0, 0, 1));
    const NoiseFamily family = sample_reference(10, frng);
    const ConfusionMatrix c = confusion_at(family, 10);
    Rng crng(derive_seed(9, 0, 0, 3));
    Dataset noisy = with_observed(data, corrupt_labels(*data.truth, c, crng));

    UmaConfig cfg;
    cfg.max_updates = 50;
    long observed_updates = 0;
    const auto [w, stats] = train_uma(noisy, c, cfg,
                                      [&](long k, const UpdateCandidate&, const WeightMatrix&) {
                                          observed_updates = k;
                                      });
    CHECK(stats.updates == 50);
    CHECK_FALSE(stats.converged);
    CHECK(observed_updates == 50);
}

TEST_CASE("training is bitwise deterministic for every strategy") {
    auto [data, wstar] = generate_synthetic(6, 500, 0.025, 55);
    Rng frng(derive_seed(55, 0, 0, 1));
    const NoiseFamily family = sample_reference(6, frng);
    const ConfusionMatrix c = confusion_at(family, 5);
    Rng crng(derive_seed(55, 0, 0, 3));
    Dataset noisy = with_observed(data, corrupt_labels(*data.truth, c, crng));

    for (SelectionStrategy s :
         {SelectionStrategy::error, SelectionStrategy::confusion, SelectionStrategy::random}) {
        UmaConfig cfg;
        cfg.strategy = s;
        cfg.seed = 77;
        cfg.max_updates = 400;
        const auto [w1, s1] = train_uma(noisy, c, cfg);
        const auto [w2, s2] = train_uma(noisy, c, cfg);
        CHECK(w1.m == w2.m);
        CHECK(s1.updates == s2.updates);
    }
}

TEST_CASE("knowing the true confusion beats trusting corrupted labels") {
    double uma_mean = 0.0, perceptron_mean = 0.0;
    const int reps = 10;
    for (std::uint64_t rep = 0; rep < reps; ++rep) {
        auto [data, wstar] = generate_synthetic(10, 1000, 0.025, derive_seed(300, rep, 0, 2));
        Rng frng(derive_seed(300, rep, 0, 1));
        const NoiseFamily family = sample_reference(10, frng);
        const ConfusionMatrix c = confusion_at(family, 10);
        Rng crng(derive_seed(300, rep, 0, 3));
        Dataset noisy = with_observed(data, corrupt_labels(*data.truth, c, crng));
        Rng trng(derive_seed(300, rep, 0, 6));
        const Dataset test = sample_margin_points(wstar, 4000, 0.025, trng);

        UmaConfig cfg;
        const auto [wu, su] = train_uma(noisy, c, cfg);
        const auto [wp, sp] = train_ultraconservative(noisy, TauPolicy::perceptron_single, 0.0,
                                                      100);
        uma_mean += confusion_rate(
            recall_confusion(predict_all(wu, test.features), *test.truth, 10));
        perceptron_mean += confusion_rate(
            recall_confusion(predict_all(wp, test.features), *test.truth, 10));
    }
    CHECK(uma_mean / reps < perceptron_mean / reps);
}

TEST_CASE("config validation and the default update budget") {
    CHECK(default_max_updates(0.0) == 10000);
    CHECK(default_max_updates(0.01) == 10000);
    CHECK(default_max_updates(0.2) == 500);
    CHECK(default_max_updates(1.0) == 20);

    Dataset d = tiny({{1.0, 0.0}}, {0}, 2);
    UmaConfig bad;
    bad.stop_epsilon = 0.0;
    CHECK_THROWS_AS(train_uma(d, ConfusionMatrix::identity(2), bad), InputError);
    CHECK_THROWS_AS(train_uma(d, ConfusionMatrix::identity(3), UmaConfig{}), InputError);
}

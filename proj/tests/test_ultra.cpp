#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "uma/data.hpp"
#include "uma/rng.hpp"
#include "uma/ultra.hpp"

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

} // namespace

TEST_CASE("error set under zero weights") {
    WeightMatrix w = WeightMatrix::zeros(2, 4);
    const Eigen::Vector2d x(0.3, -0.7);
    CHECK(error_set(w, x, 1, 0.0) == std::vector<int>{0, 2, 3});
    CHECK(error_set(w, x, 1, 0.1).empty());
}

TEST_CASE("error set on hand-evaluated prototypes") {
    DenseMatrix m(2, 3);
    m.col(0) = Eigen::Vector2d(1.0, 0.0);
    m.col(1) = Eigen::Vector2d(0.0, 1.0);
    m.col(2) = Eigen::Vector2d(-1.0, -1.0);
    WeightMatrix w{m};
    const Eigen::Vector2d x(1.0, 0.0);
    CHECK(error_set(w, x, 0, 0.0).empty());
    CHECK(error_set(w, x, 1, 0.0) == std::vector<int>{0});
}

TEST_CASE("uniform split spreads the negative mass evenly") {
    const Eigen::VectorXd s = Eigen::VectorXd::Zero(3);
    const Eigen::VectorXd t = taus({1, 2}, 0, 3, TauPolicy::uniform_split, s);
    CHECK(t[0] == 1.0);
    CHECK(t[1] == -0.5);
    CHECK(t[2] == -0.5);
}

TEST_CASE("perceptron policy hits only the strongest offender") {
    Eigen::VectorXd s(3);
    s << 0.2, -0.1, 0.9;
    const Eigen::VectorXd t = taus({2}, 1, 3, TauPolicy::perceptron_single, s);
    CHECK(t[0] == 0.0);
    CHECK(t[1] == 1.0);
    CHECK(t[2] == -1.0);

    s << 0.9, -0.1, 0.9; // tie between offenders 0 and 2 goes to the lower index
    const Eigen::VectorXd t2 = taus({0, 2}, 1, 3, TauPolicy::perceptron_single, s);
    CHECK(t2[0] == -1.0);
    CHECK(t2[2] == 0.0);
}

TEST_CASE("taus validate their inputs") {
    const Eigen::VectorXd s = Eigen::VectorXd::Zero(3);
    CHECK_THROWS_AS(taus({}, 0, 3, TauPolicy::uniform_split, s), ContractViolation);
    CHECK_THROWS_AS(taus({0, 1}, 0, 3, TauPolicy::uniform_split, s), ContractViolation);
    CHECK_THROWS_AS(taus({5}, 0, 3, TauPolicy::uniform_split, s), ContractViolation);
}

TEST_CASE("tau constraints hold on ten thousand random error sets") {
    Rng rng(101);
    for (int trial = 0; trial < 10000; ++trial) {
        const int q = 2 + static_cast<int>(rng.below(11));
        const int y = static_cast<int>(rng.below(static_cast<std::uint64_t>(q)));
        std::set<int> err_set;
        const int wanted = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(q - 1)));
        while (static_cast<int>(err_set.size()) < wanted) {
            const int r = static_cast<int>(rng.below(static_cast<std::uint64_t>(q)));
            if (r != y) err_set.insert(r);
        }
        const std::vector<int> err(err_set.begin(), err_set.end());
        Eigen::VectorXd scores(q);
        for (int k = 0; k < q; ++k) scores[k] = rng.gaussian();
        const TauPolicy policy =
            rng.below(2) == 0 ? TauPolicy::perceptron_single : TauPolicy::uniform_split;
        const Eigen::VectorXd t = taus(err, y, q, policy, scores);

        REQUIRE(t.size() == q);
        CHECK(t[y] == 1.0);
        CHECK(std::abs(t.sum()) <= 1e-12);
        for (int k = 0; k < q; ++k) {
            if (k == y) continue;
            const bool in_err = err_set.count(k) > 0;
            if (in_err) CHECK(t[k] <= 0.0);
            else CHECK(t[k] == 0.0);
        }
        if (policy == TauPolicy::perceptron_single) {
            int best = -1;
            for (int r : err)
                if (best < 0 || scores[r] > scores[best]) best = r;
            for (int k = 0; k < q; ++k)
                if (k != y) CHECK(t[k] == (k == best ? -1.0 : 0.0));
        }
    }
}

TEST_CASE("a single example is learned in at most one update") {
    Dataset d = tiny({{0.6, 0.8}}, {2}, 3);
    const auto [w, stats] = train_ultraconservative(d);
    CHECK(stats.updates <= 1);
    CHECK(stats.converged);
    CHECK(predict(w, Eigen::Vector2d(0.6, 0.8)) == 2);
}

TEST_CASE("training fits the observed labels, not the true ones") {
    Dataset d = tiny({{1.0, 0.0}, {-1.0, 0.0}}, {1, 0}, 2);
    d.truth = std::vector<int>{0, 1};
    const auto [w, stats] = train_ultraconservative(d);
    CHECK(stats.converged);
    CHECK(predict(w, Eigen::Vector2d(1.0, 0.0)) == 1);
    CHECK(predict(w, Eigen::Vector2d(-1.0, 0.0)) == 0);
}

TEST_CASE("update count respects the margin mistake bound") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto [data, wstar] = generate_synthetic(10, 300, 0.025, seed);
        const double theta =
            dataset_margin(wstar, data.features, data.observed);
        REQUIRE(theta >= 0.025);
        const auto [w, stats] = train_ultraconservative(data, TauPolicy::perceptron_single, 0.0,
                                                        1000);
        CHECK(stats.converged);
        CHECK(static_cast<double>(stats.updates) <= 2.0 / (theta * theta));
    }
}

TEST_CASE("separable ten-class data reaches zero training error") {
    auto [data, wstar] = generate_synthetic(10, 1000, 0.025, 99);
    const auto [w, stats] = train_ultraconservative(data, TauPolicy::perceptron_single, 0.0, 200);
    CHECK(stats.converged);
    CHECK(predict_all(w, data.features) == data.observed);
}

TEST_CASE("prototype columns sum to zero after training") {
    auto [data, wstar] = generate_synthetic(6, 400, 0.025, 17);
    for (TauPolicy policy : {TauPolicy::perceptron_single, TauPolicy::uniform_split}) {
        const auto [w, stats] = train_ultraconservative(data, policy, 0.0, 300);
        CHECK(w.m.rowwise().sum().norm() <= 1e-9);
    }
}

TEST_CASE("training is bitwise deterministic") {
    auto [data, wstar] = generate_synthetic(8, 500, 0.025, 4242);
    const auto [w1, s1] = train_ultraconservative(data);
    const auto [w2, s2] = train_ultraconservative(data);
    CHECK(w1.m == w2.m);
    CHECK(s1.updates == s2.updates);
}

TEST_CASE("non-separable data stops at the epoch cap without converging") {
    Dataset d = tiny({{1.0, 0.0}, {1.0, 0.0}}, {0, 1}, 2); // identical point, two labels
    const auto [w, stats] = train_ultraconservative(d, TauPolicy::perceptron_single, 0.0, 25);
    CHECK_FALSE(stats.converged);
    CHECK(stats.epochs_or_iterations == 25);
}

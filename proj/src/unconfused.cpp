#include "uma/unconfused.hpp"

#include <algorithm>
#include <cmath>

namespace uma {

long default_max_updates(double alpha) {
    const double eff = std::max(alpha, 0.01);
    const double raw = 10.0 * std::ceil(2.0 / (eff * eff));
    return raw > 10000.0 ? 10000L : static_cast<long>(raw);
}

namespace {

// best and second-best score per row, ties resolved to the lower class index
struct TopTwo {
    std::vector<int> first;
    std::vector<double> first_val;
    std::vector<double> second_val;
};

TopTwo top_two(const DenseMatrix& s) {
    TopTwo t;
    const Eigen::Index n = s.rows(), q = s.cols();
    t.first.resize(static_cast<std::size_t>(n));
    t.first_val.resize(static_cast<std::size_t>(n));
    t.second_val.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        int b = 0;
        for (Eigen::Index c = 1; c < q; ++c)
            if (s(i, c) > s(i, b)) b = static_cast<int>(c);
        double second = -std::numeric_limits<double>::infinity();
        for (Eigen::Index c = 0; c < q; ++c)
            if (static_cast<int>(c) != b && s(i, c) > second) second = s(i, c);
        t.first[static_cast<std::size_t>(i)] = b;
        t.first_val[static_cast<std::size_t>(i)] = s(i, b);
        t.second_val[static_cast<std::size_t>(i)] = second;
    }
    return t;
}

// all candidates for the current weights, in (p, q) lexicographic order
std::vector<UpdateCandidate> build_candidates(const Dataset& data, const ConfusionMatrix& c,
                                              const WeightMatrix& w, double alpha) {
    const int q = data.num_classes;
    const Eigen::Index n = data.n(), d = data.dim();
    const DenseMatrix s = data.features.scores(w.m);
    const TopTwo t = top_two(s);

    std::vector<UpdateCandidate> out;
    out.reserve(static_cast<std::size_t>(q) * static_cast<std::size_t>(q - 1));
    DenseMatrix gt(d, q); // gamma transposed, columns are class moments
    for (int p = 0; p < q; ++p) {
        gt.setZero();
        for (Eigen::Index i = 0; i < n; ++i) {
            const double rival = t.first[static_cast<std::size_t>(i)] == p
                                     ? t.second_val[static_cast<std::size_t>(i)]
                                     : t.first_val[static_cast<std::size_t>(i)];
            if (s(i, p) - rival >= alpha)
                data.features.add_row_to(i, 1.0, gt.col(data.observed[static_cast<std::size_t>(i)]));
        }
        gt /= static_cast<double>(n);
        const DenseMatrix z = c.inverse() * gt.transpose(); // row r = z_pr
        for (int r = 0; r < q; ++r) {
            if (r == p) continue;
            UpdateCandidate cand;
            cand.p = p;
            cand.q = r;
            cand.z = z.row(r).transpose();
            cand.norm = cand.z.norm();
            out.push_back(std::move(cand));
        }
    }
    return out;
}

} // namespace

std::vector<Eigen::Index> region(const WeightMatrix& w, const Dataset& data, int p, double alpha) {
    if (p < 0 || p >= data.num_classes) throw InputError("region class out of range");
    const DenseMatrix s = data.features.scores(w.m);
    std::vector<Eigen::Index> out;
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
        bool in = true;
        for (Eigen::Index k = 0; k < s.cols() && in; ++k)
            if (static_cast<int>(k) != p && s(i, p) - s(i, k) < alpha) in = false;
        if (in) out.push_back(i);
    }
    return out;
}

DenseMatrix class_moments(const Dataset& data, const std::vector<Eigen::Index>& region) {
    const Eigen::Index n = data.n(), d = data.dim();
    DenseMatrix gt = DenseMatrix::Zero(d, data.num_classes);
    for (Eigen::Index i : region) {
        if (i < 0 || i >= n) throw InputError("region index out of range");
        data.features.add_row_to(i, 1.0, gt.col(data.observed[static_cast<std::size_t>(i)]));
    }
    gt /= static_cast<double>(n);
    return gt.transpose();
}

DenseMatrix unconfused_updates(const DenseMatrix& gamma, const ConfusionMatrix& c) {
    if (gamma.rows() != c.size()) throw InputError("moment row count does not match class count");
    return c.inverse() * gamma;
}

Eigen::VectorXd estimate_priors(const Dataset& data, const ConfusionMatrix& c) {
    if (c.size() != data.num_classes) throw InputError("confusion size does not match class count");
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(data.num_classes);
    for (int y : data.observed) counts[y] += 1.0;
    Eigen::VectorXd pri = c.inverse() * (counts / static_cast<double>(data.n()));
    for (Eigen::Index i = 0; i < pri.size(); ++i) pri[i] = std::clamp(pri[i], 1e-6, 1.0);
    return pri;
}

std::optional<std::pair<int, int>> select_pair(const std::vector<UpdateCandidate>& candidates,
                                               SelectionStrategy strategy,
                                               const Eigen::VectorXd& priors, Rng& rng) {
    if (candidates.empty()) return std::nullopt;
    if (strategy == SelectionStrategy::random) {
        std::vector<std::size_t> alive;
        for (std::size_t i = 0; i < candidates.size(); ++i)
            if (candidates[i].norm > 0.0) alive.push_back(i);
        if (alive.empty()) return std::nullopt;
        const auto& c = candidates[alive[static_cast<std::size_t>(rng.below(alive.size()))]];
        return std::make_pair(c.p, c.q);
    }
    double best = 0.0;
    const UpdateCandidate* pick = nullptr;
    for (const auto& c : candidates) {
        const double score =
            strategy == SelectionStrategy::error ? c.norm : c.norm / priors[c.q];
        if (c.norm <= 0.0) continue;
        const bool tie_wins = pick && score == best &&
                              std::make_pair(c.p, c.q) < std::make_pair(pick->p, pick->q);
        if (score > best || tie_wins) {
            best = score;
            pick = &c;
        }
    }
    if (!pick) return std::nullopt;
    return std::make_pair(pick->p, pick->q);
}

std::pair<WeightMatrix, TrainStats> train_uma(const Dataset& data, const ConfusionMatrix& c,
                                              const UmaConfig& config, const UpdateObserver& observer) {
    data.validate();
    if (c.size() != data.num_classes) throw InputError("confusion size does not match class count");
    if (config.stop_epsilon <= 0.0) throw InputError("stop_epsilon must be positive");

    const int q = data.num_classes;
    WeightMatrix w = WeightMatrix::zeros(data.dim(), q);
    TrainStats stats;
    Rng rng(config.seed);
    const Eigen::VectorXd priors = estimate_priors(data, c);

    while (stats.updates < config.max_updates) {
        std::vector<UpdateCandidate> candidates = build_candidates(data, c, w, config.alpha);
        bool applied = false;
        while (true) {
            const auto sel = select_pair(candidates, config.strategy, priors, rng);
            if (!sel) {
                stats.converged = true;
                break;
            }
            const auto it = std::find_if(candidates.begin(), candidates.end(), [&](const auto& cd) {
                return cd.p == sel->first && cd.q == sel->second;
            });
            UpdateCandidate cand = *it;
            if (cand.norm < config.stop_epsilon) {
                stats.converged = true;
                stats.final_update_norm = cand.norm;
                break;
            }
            const Eigen::VectorXd s = w.m.transpose() * cand.z;
            const std::vector<int> err = error_set(s, cand.q, config.alpha);
            if (err.empty()) {
                candidates.erase(it); // no way to act on this pair under the current weights
                continue;
            }
            const Eigen::VectorXd tau = taus(err, cand.q, q, config.policy, s);
            for (int k = 0; k < q; ++k)
                if (tau[k] != 0.0) w.m.col(k) += tau[k] * cand.z;
            ++stats.updates;
            stats.final_update_norm = cand.norm;
            applied = true;
            if (observer) observer(stats.updates, cand, w);
            break;
        }
        ++stats.epochs_or_iterations;
        if (!applied) break;
    }
    if (stats.updates >= config.max_updates) stats.converged = false;
    return {std::move(w), stats};
}

} // namespace uma

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "uma/core.hpp"
#include "uma/rng.hpp"
#include "uma/ultra.hpp"

namespace uma {

// One z_pq proposal: the unconfused moment of presumed-true class q inside the
// region currently predicted as p.
struct UpdateCandidate {
    int p = 0;
    int q = 0;
    Eigen::VectorXd z;
    double norm = 0.0;
};

enum class SelectionStrategy { error, confusion, random };

struct UmaConfig {
    double alpha = 0.0;
    double stop_epsilon = 1e-3;
    long max_updates = 10000;
    SelectionStrategy strategy = SelectionStrategy::error;
    std::uint64_t seed = 0;
    TauPolicy policy = TauPolicy::perceptron_single;
};

// 10 * ceil(2 / max(alpha, 0.01)^2), capped at 10000
long default_max_updates(double alpha);

// indices whose scores put them in class p's cell with gap >= alpha against
// every rival
std::vector<Eigen::Index> region(const WeightMatrix& w, const Dataset& data, int p, double alpha);

// row k = (1/n) * sum of x_i over region members with observed label k; note
// the divisor is the full dataset size, not the region size
DenseMatrix class_moments(const Dataset& data, const std::vector<Eigen::Index>& region);

// C^-1 * gamma; row q is the candidate z_pq
DenseMatrix unconfused_updates(const DenseMatrix& gamma, const ConfusionMatrix& c);

// (1/n) * C^-1 * observed class counts, clamped to [1e-6, 1]
Eigen::VectorXd estimate_priors(const Dataset& data, const ConfusionMatrix& c);

// Picks the candidate to apply. error: largest norm; confusion: largest
// norm / prior of q; random: uniform over candidates with positive norm.
// Ties go to the lexicographically smallest (p, q). Empty result means no
// candidate can help (all norms zero or no candidates), which stops training.
std::optional<std::pair<int, int>> select_pair(const std::vector<UpdateCandidate>& candidates,
                                               SelectionStrategy strategy,
                                               const Eigen::VectorXd& priors, Rng& rng);

// Called after each applied update with the 1-based update count, the chosen
// candidate, and the weights after the update.
using UpdateObserver = std::function<void(long, const UpdateCandidate&, const WeightMatrix&)>;

// Noise-robust training: rebuild all candidates from the current weights,
// select a pair, relabel its z with class q, and apply an ultraconservative
// update. A selected candidate whose error set is empty is excluded and
// selection retries; training stops when the selected norm drops below
// stop_epsilon, when no useful candidate remains, or at max_updates.
std::pair<WeightMatrix, TrainStats> train_uma(const Dataset& data, const ConfusionMatrix& c,
                                              const UmaConfig& config,
                                              const UpdateObserver& observer = nullptr);

} // namespace uma

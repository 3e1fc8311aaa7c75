#pragma once

#include <utility>
#include <vector>

#include "uma/core.hpp"

namespace uma {

// How the negative step mass is spread over the error set. perceptron_single
// puts -1 on the highest-scoring offender; uniform_split spreads -1/|E|.
enum class TauPolicy { perceptron_single, uniform_split };

// classes r != y whose score beats the labelled class's score by at least alpha
std::vector<int> error_set(const Eigen::VectorXd& scores, int y, double alpha);
std::vector<int> error_set(const WeightMatrix& w, const Eigen::VectorXd& x, int y, double alpha);

// Step sizes: tau[y] = 1, tau <= 0 on the error set, 0 elsewhere, summing to 0.
// scores are needed by perceptron_single to locate the strongest offender
// (ties to the lowest class index).
Eigen::VectorXd taus(const std::vector<int>& error, int y, int num_classes, TauPolicy policy,
                     const Eigen::VectorXd& scores);

// Additive multiclass training: sweep the data in order, and on each nonempty
// error set add tau_q * x to every prototype. Stops after an epoch with no
// updates (converged) or at max_epochs. Trains against observed labels.
std::pair<WeightMatrix, TrainStats> train_ultraconservative(
    const Dataset& data, TauPolicy policy = TauPolicy::perceptron_single, double alpha = 0.0,
    long max_epochs = 1000);

} // namespace uma

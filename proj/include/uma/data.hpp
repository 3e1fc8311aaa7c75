#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "uma/core.hpp"
#include "uma/rng.hpp"

namespace uma {

struct SyntheticOptions {
    Eigen::Index dim = 2; // 2 matches the reference experiments; >2 samples prototypes on the sphere
};

// Draws unit-norm prototypes (stacked and Frobenius-normalized into W*),
// samples points uniformly on the circle/sphere, labels them by argmax, and
// keeps only points whose margin under W* reaches theta. Prototype draws that
// leave some class with no surviving mass are rejected and redrawn, so every
// returned dataset contains all Q classes. True labels are filled in.
std::pair<Dataset, WeightMatrix> generate_synthetic(int num_classes, Eigen::Index n_target,
                                                    double theta, std::uint64_t seed,
                                                    const SyntheticOptions& opts = {});

// Draws n margin-filtered points for an existing W* (fresh test sets for the
// sweeps). The whole draw is rejected and repeated, up to retries times, until
// every class appears at least once.
Dataset sample_margin_points(const WeightMatrix& wstar, Eigen::Index n, double theta, Rng& rng,
                             int retries = 50);

// Delimiter-separated numeric rows with the class label in one column
// (negative label_column counts from the end; -1 is the last column). Label
// tokens become class ids 1..Q: numerically sorted when every distinct token
// parses as an integer, lexicographically otherwise.
Dataset load_dense(const std::string& path, char delimiter = ',', int label_column = -1);

// "label idx:val idx:val ..." lines; labels 1-based, indices 1-based and
// strictly increasing within a line
Dataset load_sparse(const std::string& path);

// picks load_sparse when the first data line contains ':', load_dense otherwise
Dataset load_auto(const std::string& path, char delimiter = ',', int label_column = -1);

void save_sparse(const std::string& path, const Dataset& data);

// delimiter-separated feature values with the 1-based label in the last
// column, printed with %.17g so a reload is bit-exact
void save_dense(const std::string& path, const Dataset& data, char delimiter = ',');

// exactly m_per_class examples of every class (by true label), without
// replacement; remainder keeps everything else
std::pair<Dataset, Dataset> stratified_sample(const Dataset& data, Eigen::Index m_per_class,
                                              Rng& rng);

// uniform split into ceil(fraction * n) and the rest
std::pair<Dataset, Dataset> holdout_split(const Dataset& data, double fraction, Rng& rng);

Dataset subset(const Dataset& data, const std::vector<Eigen::Index>& indices);

// same features, new observed labels (used after corrupting)
Dataset with_observed(const Dataset& data, std::vector<int> observed);

} // namespace uma

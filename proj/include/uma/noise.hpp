#pragma once

#include <vector>

#include "uma/core.hpp"
#include "uma/rng.hpp"

namespace uma {

// A reference corruption process M (row-stochastic, invertible) together with
// its direction N = (M - I) / 10; interpolating I + i*N walks from no noise
// (i=0) to M itself (i=10) and past it.
struct NoiseFamily {
    DenseMatrix m;
    DenseMatrix n;
};

// clamp negatives to zero, then normalize each row to sum 1
DenseMatrix omega(const DenseMatrix& a);

// i.i.d. uniform entries, rows normalized, redrawn until the transpose passes
// the confusion inversion guard
NoiseFamily sample_reference(int num_classes, Rng& rng);

// Omega(I + i*N) built row-stochastic, returned transposed as the canonical
// column-stochastic confusion matrix (entry [observed][true]). This is the one
// place the row-versus-column convention is reconciled.
ConfusionMatrix confusion_at(const NoiseFamily& family, long i);

// 1 - i/10: how far the matrix handed to the learner is from the truth at i=10
double approximation_factor(long i);

// sample observed labels: for true class q, draw from column q of the matrix
std::vector<int> corrupt_labels(const std::vector<int>& true_labels, const ConfusionMatrix& c,
                                Rng& rng);

} // namespace uma

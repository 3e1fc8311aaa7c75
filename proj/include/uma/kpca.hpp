#pragma once

#include "uma/core.hpp"
#include "uma/rng.hpp"

namespace uma {

// Fitted Gaussian kernel PCA: projects points onto the top principal axes of
// the feature-space covariance. Eigenvectors are scaled by 1/sqrt(eigenvalue)
// so projections carry the component variances.
struct KpcaProjector {
    DenseMatrix train_points; // m x d
    double sigma = 1.0;
    DenseMatrix alphas;            // m x D
    Eigen::VectorXd row_means;     // per-row mean of the raw training Gram
    double grand_mean = 0.0;       // mean of all raw Gram entries
    Eigen::Index output_dim() const { return alphas.cols(); }
};

// entry (i,j) = exp(-|x_i - x'_j|^2 / (2 sigma^2))
DenseMatrix gaussian_gram(const DenseMatrix& x, const DenseMatrix& x2, double sigma);

// Double-centers the Gram matrix, keeps the top axes with eigenvalue above
// 1e-10 (at most requested_dim of them).
KpcaProjector kpca_fit(const DenseMatrix& x, double sigma, Eigen::Index requested_dim);

DenseMatrix kpca_transform(const KpcaProjector& p, const DenseMatrix& xnew);

// median pairwise distance over a subsample of at most 1000 rows; the usual
// bandwidth heuristic when nothing better is known
double median_bandwidth(const DenseMatrix& x, Rng& rng, Eigen::Index max_points = 1000);

} // namespace uma

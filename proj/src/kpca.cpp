#include "uma/kpca.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <vector>

namespace uma {

DenseMatrix gaussian_gram(const DenseMatrix& x, const DenseMatrix& x2, double sigma) {
    if (sigma <= 0.0) throw InputError("kernel bandwidth must be positive");
    if (x.cols() != x2.cols()) throw InputError("kernel operands must share dimension");
    const Eigen::VectorXd na = x.rowwise().squaredNorm();
    const Eigen::VectorXd nb = x2.rowwise().squaredNorm();
    DenseMatrix d2 = (-2.0 * x * x2.transpose());
    d2.colwise() += na;
    d2.rowwise() += nb.transpose();
    const double inv = 1.0 / (2.0 * sigma * sigma);
    return (-d2.cwiseMax(0.0) * inv).array().exp();
}

KpcaProjector kpca_fit(const DenseMatrix& x, double sigma, Eigen::Index requested_dim) {
    const Eigen::Index m = x.rows();
    if (m < 1) throw InputError("cannot fit a projector on an empty matrix");
    if (requested_dim < 1 || requested_dim > m)
        throw InputError("projection dimension must lie in 1..m");

    const DenseMatrix k = gaussian_gram(x, x, sigma);
    const Eigen::VectorXd row_means = k.rowwise().mean();
    const double grand = k.mean();
    DenseMatrix kc = k;
    kc.colwise() -= row_means;
    kc.rowwise() -= row_means.transpose();
    kc.array() += grand;

    Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(kc);
    if (eig.info() != Eigen::Success) throw DegenerateKernel("eigendecomposition failed");

    // eigenvalues ascend; walk from the top, keep those above tolerance
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = m - 1; j >= 0 && static_cast<Eigen::Index>(keep.size()) < requested_dim; --j)
        if (eig.eigenvalues()[j] > 1e-10) keep.push_back(j);
    if (keep.empty())
        throw DegenerateKernel("no kernel principal axis above tolerance (identical inputs?)");

    KpcaProjector p;
    p.train_points = x;
    p.sigma = sigma;
    p.row_means = row_means;
    p.grand_mean = grand;
    p.alphas.resize(m, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j)
        p.alphas.col(static_cast<Eigen::Index>(j)) =
            eig.eigenvectors().col(keep[j]) / std::sqrt(eig.eigenvalues()[keep[j]]);
    return p;
}

DenseMatrix kpca_transform(const KpcaProjector& p, const DenseMatrix& xnew) {
    if (xnew.cols() != p.train_points.cols())
        throw InputError("point dimension does not match the fitted projector");
    if (xnew.rows() == 0) return DenseMatrix(0, p.output_dim());
    DenseMatrix k2 = gaussian_gram(xnew, p.train_points, p.sigma);
    const Eigen::VectorXd new_means = k2.rowwise().mean();
    k2.colwise() -= new_means;
    k2.rowwise() -= p.row_means.transpose();
    k2.array() += p.grand_mean;
    return k2 * p.alphas;
}

double median_bandwidth(const DenseMatrix& x, Rng& rng, Eigen::Index max_points) {
    if (x.rows() < 2) throw InputError("bandwidth heuristic needs at least two points");
    const Eigen::Index m = std::min<Eigen::Index>(x.rows(), max_points);
    const auto perm = rng.permutation(static_cast<std::size_t>(x.rows()));
    std::vector<double> dists;
    dists.reserve(static_cast<std::size_t>(m) * static_cast<std::size_t>(m - 1) / 2);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = i + 1; j < m; ++j)
            dists.push_back((x.row(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)])) -
                             x.row(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(j)])))
                                .norm());
    auto mid = dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2);
    std::nth_element(dists.begin(), mid, dists.end());
    return *mid > 0.0 ? *mid : 1.0;
}

} // namespace uma

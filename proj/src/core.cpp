#include "uma/core.hpp"

#include <Eigen/LU>

#include <cmath>
#include <limits>

namespace uma {

Eigen::Index FeatureMatrix::rows() const {
    return std::visit([](const auto& m) { return m.rows(); }, data_);
}

Eigen::Index FeatureMatrix::cols() const {
    return std::visit([](const auto& m) { return m.cols(); }, data_);
}

DenseMatrix FeatureMatrix::scores(const DenseMatrix& W) const {
    return std::visit([&](const auto& m) -> DenseMatrix { return m * W; }, data_);
}

Eigen::VectorXd FeatureMatrix::score_row(Eigen::Index i, const DenseMatrix& W) const {
    if (const auto* d = std::get_if<DenseMatrix>(&data_)) return (d->row(i) * W).transpose();
    const auto& s = std::get<SparseMatrix>(data_);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(W.cols());
    for (SparseMatrix::InnerIterator it(s, i); it; ++it) out += it.value() * W.row(it.col()).transpose();
    return out;
}

Eigen::VectorXd FeatureMatrix::row_dense(Eigen::Index i) const {
    if (const auto* d = std::get_if<DenseMatrix>(&data_)) return d->row(i).transpose();
    const auto& s = std::get<SparseMatrix>(data_);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(s.cols());
    for (SparseMatrix::InnerIterator it(s, i); it; ++it) out[it.col()] = it.value();
    return out;
}

double FeatureMatrix::row_squared_norm(Eigen::Index i) const {
    if (const auto* d = std::get_if<DenseMatrix>(&data_)) return d->row(i).squaredNorm();
    const auto& s = std::get<SparseMatrix>(data_);
    double acc = 0.0;
    for (SparseMatrix::InnerIterator it(s, i); it; ++it) acc += it.value() * it.value();
    return acc;
}

void FeatureMatrix::add_row_to(Eigen::Index i, double coeff, Eigen::Ref<Eigen::VectorXd> out) const {
    if (const auto* d = std::get_if<DenseMatrix>(&data_)) {
        out += coeff * d->row(i).transpose();
        return;
    }
    const auto& s = std::get<SparseMatrix>(data_);
    for (SparseMatrix::InnerIterator it(s, i); it; ++it) out[it.col()] += coeff * it.value();
}

FeatureMatrix FeatureMatrix::select_rows(const std::vector<Eigen::Index>& idx) const {
    if (const auto* d = std::get_if<DenseMatrix>(&data_)) {
        DenseMatrix out(static_cast<Eigen::Index>(idx.size()), d->cols());
        for (Eigen::Index r = 0; r < out.rows(); ++r) out.row(r) = d->row(idx[static_cast<std::size_t>(r)]);
        return FeatureMatrix(std::move(out));
    }
    const auto& s = std::get<SparseMatrix>(data_);
    std::vector<Eigen::Triplet<double>> trips;
    for (std::size_t r = 0; r < idx.size(); ++r)
        for (SparseMatrix::InnerIterator it(s, idx[r]); it; ++it)
            trips.emplace_back(static_cast<int>(r), static_cast<int>(it.col()), it.value());
    SparseMatrix out(static_cast<Eigen::Index>(idx.size()), s.cols());
    out.setFromTriplets(trips.begin(), trips.end());
    return FeatureMatrix(std::move(out));
}

DenseMatrix FeatureMatrix::to_dense() const {
    if (const auto* d = std::get_if<DenseMatrix>(&data_)) return *d;
    return DenseMatrix(std::get<SparseMatrix>(data_));
}

const DenseMatrix& FeatureMatrix::dense() const {
    if (const auto* d = std::get_if<DenseMatrix>(&data_)) return *d;
    throw InputError("dense() called on a sparse feature matrix");
}

const SparseMatrix& FeatureMatrix::sparse() const {
    if (const auto* s = std::get_if<SparseMatrix>(&data_)) return *s;
    throw InputError("sparse() called on a dense feature matrix");
}

void Dataset::validate() const {
    if (num_classes < 1) throw InputError("dataset needs at least one class");
    if (static_cast<Eigen::Index>(observed.size()) != features.rows())
        throw InputError("label count does not match feature row count");
    if (truth && truth->size() != observed.size())
        throw InputError("true label count does not match feature row count");
    auto check = [this](const std::vector<int>& ls) {
        for (int v : ls)
            if (v < 0 || v >= num_classes)
                throw InputError("label id " + std::to_string(v + 1) + " outside 1.." +
                                 std::to_string(num_classes));
    };
    check(observed);
    if (truth) check(*truth);
}

int argmax_row(const DenseMatrix& scores, Eigen::Index i) {
    int best = 0;
    double bestv = scores(i, 0);
    for (Eigen::Index q = 1; q < scores.cols(); ++q)
        if (scores(i, q) > bestv) {
            bestv = scores(i, q);
            best = static_cast<int>(q);
        }
    return best;
}

int predict(const WeightMatrix& w, const Eigen::VectorXd& x) {
    if (x.size() != w.dim()) throw InputError("point dimension does not match weight matrix");
    Eigen::VectorXd s = w.m.transpose() * x;
    int best = 0;
    for (Eigen::Index q = 1; q < s.size(); ++q)
        if (s[q] > s[best]) best = static_cast<int>(q);
    return best;
}

std::vector<int> predict_all(const WeightMatrix& w, const FeatureMatrix& x) {
    if (x.cols() != w.dim()) throw InputError("feature dimension does not match weight matrix");
    const DenseMatrix s = x.scores(w.m);
    std::vector<int> out(static_cast<std::size_t>(s.rows()));
    for (Eigen::Index i = 0; i < s.rows(); ++i) out[static_cast<std::size_t>(i)] = argmax_row(s, i);
    return out;
}

double dataset_margin(const WeightMatrix& w, const FeatureMatrix& features,
                      const std::vector<int>& labels) {
    if (features.rows() == 0) throw InputError("dataset_margin needs at least one example");
    if (static_cast<Eigen::Index>(labels.size()) != features.rows())
        throw InputError("label count does not match feature row count");
    const DenseMatrix s = features.scores(w.m);
    double margin = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
        const int y = labels[static_cast<std::size_t>(i)];
        double rival = -std::numeric_limits<double>::infinity();
        for (Eigen::Index p = 0; p < s.cols(); ++p)
            if (p != y && s(i, p) > rival) rival = s(i, p);
        margin = std::min(margin, s(i, y) - rival);
    }
    return margin;
}

ConfusionMatrix invert_confusion(const DenseMatrix& c) {
    if (c.rows() != c.cols() || c.rows() < 1) throw InputError("confusion matrix must be square");
    const Eigen::Index q = c.rows();
    for (Eigen::Index j = 0; j < q; ++j) {
        double sum = 0.0;
        for (Eigen::Index i = 0; i < q; ++i) {
            const double v = c(i, j);
            if (v < -1e-9 || v > 1.0 + 1e-9)
                throw InputError("confusion entries must lie in [0,1]");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw InputError("confusion column " + std::to_string(j + 1) + " sums to " +
                             std::to_string(sum) + ", expected 1");
    }

    Eigen::FullPivLU<DenseMatrix> lu(c);
    if (!lu.isInvertible()) throw SingularConfusion("confusion matrix is singular");
    DenseMatrix inv = lu.inverse();
    // one Newton polish step: X <- X(2I - CX); tightens C*X toward I
    inv = inv * (2.0 * DenseMatrix::Identity(q, q) - c * inv);

    const double rcond = 1.0 / (c.cwiseAbs().colwise().sum().maxCoeff() *
                                inv.cwiseAbs().colwise().sum().maxCoeff());
    if (rcond < 1e-10)
        throw SingularConfusion("confusion matrix is numerically singular (rcond < 1e-10)");
    const double residual = (c * inv - DenseMatrix::Identity(q, q)).cwiseAbs().maxCoeff();
    if (residual > 1e-8)
        throw SingularConfusion("confusion inverse residual " + std::to_string(residual) +
                                " exceeds 1e-8");
    return ConfusionMatrix(c, std::move(inv));
}

ConfusionMatrix ConfusionMatrix::identity(Eigen::Index q) {
    return invert_confusion(DenseMatrix::Identity(q, q));
}

} // namespace uma

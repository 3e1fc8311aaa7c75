#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "uma/errors.hpp"

namespace uma {

using DenseMatrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Feature storage that lets sparse text-style data flow through the same
// training and evaluation paths as dense matrices.
class FeatureMatrix {
public:
    FeatureMatrix() : data_(DenseMatrix()) {}
    explicit FeatureMatrix(DenseMatrix m) : data_(std::move(m)) {}
    explicit FeatureMatrix(SparseMatrix m) : data_(std::move(m)) {}

    Eigen::Index rows() const;
    Eigen::Index cols() const;
    bool is_sparse() const { return std::holds_alternative<SparseMatrix>(data_); }

    // X * W, the n x Q score table
    DenseMatrix scores(const DenseMatrix& W) const;

    // W^T x_i without materializing a dense row
    Eigen::VectorXd score_row(Eigen::Index i, const DenseMatrix& W) const;

    Eigen::VectorXd row_dense(Eigen::Index i) const;
    double row_squared_norm(Eigen::Index i) const;

    // out += coeff * x_i  (the additive update primitive)
    void add_row_to(Eigen::Index i, double coeff, Eigen::Ref<Eigen::VectorXd> out) const;

    FeatureMatrix select_rows(const std::vector<Eigen::Index>& idx) const;
    DenseMatrix to_dense() const;

    const DenseMatrix& dense() const;
    const SparseMatrix& sparse() const;

private:
    std::variant<DenseMatrix, SparseMatrix> data_;
};

// Q prototype columns; column q scores class q.
struct WeightMatrix {
    DenseMatrix m; // d x Q

    static WeightMatrix zeros(Eigen::Index d, Eigen::Index q) {
        return WeightMatrix{DenseMatrix::Zero(d, q)};
    }
    Eigen::Index dim() const { return m.rows(); }
    Eigen::Index num_classes() const { return m.cols(); }
};

// Labels are 0-based in memory; file formats and messages use 1-based ids.
struct Dataset {
    FeatureMatrix features;
    std::vector<int> observed;
    std::optional<std::vector<int>> truth;
    int num_classes = 0;
    std::optional<std::vector<std::string>> label_names;

    Eigen::Index n() const { return features.rows(); }
    Eigen::Index dim() const { return features.cols(); }

    void validate() const;
};

struct TrainStats {
    long updates = 0;
    long epochs_or_iterations = 0;
    double final_update_norm = 0.0;
    bool converged = false;
};

// Column-stochastic corruption matrix, entry [observed][true], carrying its
// inverse. Only invert_confusion builds one, so every instance in flight has
// already passed the conditioning checks.
class ConfusionMatrix {
public:
    const DenseMatrix& matrix() const { return c_; }
    const DenseMatrix& inverse() const { return inv_; }
    Eigen::Index size() const { return c_.rows(); }

    static ConfusionMatrix identity(Eigen::Index q);

private:
    friend ConfusionMatrix invert_confusion(const DenseMatrix& c);
    ConfusionMatrix(DenseMatrix c, DenseMatrix inv) : c_(std::move(c)), inv_(std::move(inv)) {}
    DenseMatrix c_;
    DenseMatrix inv_;
};

// argmax_q <w_q, x>, ties to the lowest class index
int predict(const WeightMatrix& w, const Eigen::VectorXd& x);

// argmax per row of the score table, same tie rule
std::vector<int> predict_all(const WeightMatrix& w, const FeatureMatrix& x);
int argmax_row(const DenseMatrix& scores, Eigen::Index i);

// min over examples of the gap between the labelled class's score and its
// best rival; negative when W does not separate the data
double dataset_margin(const WeightMatrix& w, const FeatureMatrix& features,
                      const std::vector<int>& labels);

// Validates column-stochasticity, inverts, and polishes the inverse with one
// Newton step; rejects ill-conditioned input (see SingularConfusion).
ConfusionMatrix invert_confusion(const DenseMatrix& c);

} // namespace uma

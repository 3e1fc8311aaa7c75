#include "uma/metrics.hpp"

#include <cmath>

namespace uma {

DenseMatrix recall_confusion(const std::vector<int>& preds, const std::vector<int>& truths,
                             int num_classes) {
    if (preds.size() != truths.size()) throw InputError("prediction and truth lengths differ");
    if (preds.empty()) throw InputError("recall_confusion needs at least one example");

    Eigen::VectorXd class_counts = Eigen::VectorXd::Zero(num_classes);
    DenseMatrix counts = DenseMatrix::Zero(num_classes, num_classes);
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const int p = preds[i], q = truths[i];
        if (p < 0 || p >= num_classes || q < 0 || q >= num_classes)
            throw InputError("label out of range");
        class_counts[q] += 1.0;
        counts(p, q) += 1.0;
    }
    for (int q = 0; q < num_classes; ++q)
        if (class_counts[q] == 0.0)
            throw MissingClass("class " + std::to_string(q + 1) + " absent from the truth labels");

    DenseMatrix chat(num_classes, num_classes);
    for (int p = 0; p < num_classes; ++p)
        for (int q = 0; q < num_classes; ++q)
            chat(p, q) = p == q ? 0.0 : counts(p, q) / class_counts[q];
    return chat;
}

double confusion_rate(const DenseMatrix& chat) {
    if (chat.rows() != chat.cols() || chat.rows() < 1)
        throw InputError("confusion estimate must be square");
    return chat.norm() / std::sqrt(static_cast<double>(chat.rows()));
}

double error_rate(const std::vector<int>& preds, const std::vector<int>& truths) {
    if (preds.size() != truths.size()) throw InputError("prediction and truth lengths differ");
    if (preds.empty()) throw InputError("error_rate needs at least one example");
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) wrong += preds[i] != truths[i];
    return static_cast<double>(wrong) / static_cast<double>(preds.size());
}

} // namespace uma

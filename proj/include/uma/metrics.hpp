#pragma once

#include <vector>

#include "uma/core.hpp"

namespace uma {

// Recall-style confusion estimate: entry (p, q) is the fraction of true-class-q
// examples predicted as p, with the diagonal forced to zero so only errors
// remain. Every class must occur in truths, otherwise its column is undefined.
DenseMatrix recall_confusion(const std::vector<int>& preds, const std::vector<int>& truths,
                             int num_classes);

// Frobenius norm over sqrt(Q); 0 for a perfect classifier, 1 for total confusion
double confusion_rate(const DenseMatrix& chat);

double error_rate(const std::vector<int>& preds, const std::vector<int>& truths);

} // namespace uma

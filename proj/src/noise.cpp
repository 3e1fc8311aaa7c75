#include "uma/noise.hpp"

namespace uma {

DenseMatrix omega(const DenseMatrix& a) {
    DenseMatrix out = a.cwiseMax(0.0);
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
        const double sum = out.row(r).sum();
        if (sum <= 0.0)
            throw DegenerateRow("row " + std::to_string(r + 1) + " has no positive mass");
        out.row(r) /= sum;
    }
    return out;
}

NoiseFamily sample_reference(int num_classes, Rng& rng) {
    if (num_classes < 2) throw InputError("noise family needs at least two classes");
    for (int attempt = 0; attempt < 1000; ++attempt) {
        DenseMatrix m(num_classes, num_classes);
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform01();
        bool ok = true;
        for (Eigen::Index r = 0; r < m.rows() && ok; ++r) {
            const double sum = m.row(r).sum();
            if (sum <= 0.0) {
                ok = false;
                break;
            }
            m.row(r) /= sum;
        }
        if (!ok) continue;
        try {
            invert_confusion(m.transpose());
        } catch (const SingularConfusion&) {
            continue;
        }
        DenseMatrix n = (m - DenseMatrix::Identity(num_classes, num_classes)) / 10.0;
        return NoiseFamily{std::move(m), std::move(n)};
    }
    throw SamplingError("could not draw an invertible reference matrix in 1000 attempts");
}

ConfusionMatrix confusion_at(const NoiseFamily& family, long i) {
    if (i < 0) throw InputError("family index must be nonnegative");
    const Eigen::Index q = family.m.rows();
    const DenseMatrix row_form =
        omega(DenseMatrix::Identity(q, q) + static_cast<double>(i) * family.n);
    return invert_confusion(row_form.transpose());
}

double approximation_factor(long i) { return 1.0 - static_cast<double>(i) / 10.0; }

std::vector<int> corrupt_labels(const std::vector<int>& true_labels, const ConfusionMatrix& c,
                                Rng& rng) {
    const Eigen::Index q = c.size();
    std::vector<int> out(true_labels.size());
    for (std::size_t i = 0; i < true_labels.size(); ++i) {
        const int t = true_labels[i];
        if (t < 0 || t >= q) throw InputError("true label out of range");
        const double u = rng.uniform01();
        double cum = 0.0;
        int drawn = static_cast<int>(q) - 1; // fallback soaks up rounding slack
        for (Eigen::Index p = 0; p < q; ++p) {
            cum += c.matrix()(p, t);
            if (u < cum) {
                drawn = static_cast<int>(p);
                break;
            }
        }
        out[i] = drawn;
    }
    return out;
}

} // namespace uma

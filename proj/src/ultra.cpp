#include "uma/ultra.hpp"

#include <cmath>

namespace uma {

std::vector<int> error_set(const Eigen::VectorXd& scores, int y, double alpha) {
    std::vector<int> out;
    for (Eigen::Index r = 0; r < scores.size(); ++r)
        if (static_cast<int>(r) != y && scores[r] - scores[y] >= alpha)
            out.push_back(static_cast<int>(r));
    return out;
}

std::vector<int> error_set(const WeightMatrix& w, const Eigen::VectorXd& x, int y, double alpha) {
    if (x.size() != w.dim()) throw InputError("point dimension does not match weight matrix");
    return error_set(Eigen::VectorXd(w.m.transpose() * x), y, alpha);
}

Eigen::VectorXd taus(const std::vector<int>& error, int y, int num_classes, TauPolicy policy,
                     const Eigen::VectorXd& scores) {
    if (error.empty()) throw ContractViolation("taus called with an empty error set");
    Eigen::VectorXd tau = Eigen::VectorXd::Zero(num_classes);
    for (int r : error) {
        if (r == y) throw ContractViolation("labelled class cannot be in its own error set");
        if (r < 0 || r >= num_classes) throw ContractViolation("error set member out of range");
    }
    tau[y] = 1.0;
    if (policy == TauPolicy::uniform_split) {
        const double share = -1.0 / static_cast<double>(error.size());
        for (int r : error) tau[r] = share;
    } else {
        int worst = error.front();
        for (int r : error)
            if (scores[r] > scores[worst]) worst = r; // ties keep the earlier (lower) index
        tau[worst] = -1.0;
    }
    return tau;
}

std::pair<WeightMatrix, TrainStats> train_ultraconservative(const Dataset& data, TauPolicy policy,
                                                            double alpha, long max_epochs) {
    data.validate();
    if (data.n() == 0) throw InputError("cannot train on an empty dataset");
    const int q = data.num_classes;
    WeightMatrix w = WeightMatrix::zeros(data.dim(), q);
    TrainStats stats;

    for (long epoch = 0; epoch < max_epochs; ++epoch) {
        long epoch_updates = 0;
        for (Eigen::Index i = 0; i < data.n(); ++i) {
            const int y = data.observed[static_cast<std::size_t>(i)];
            const Eigen::VectorXd s = data.features.score_row(i, w.m);
            const std::vector<int> err = error_set(s, y, alpha);
            if (err.empty()) continue;
            const Eigen::VectorXd tau = taus(err, y, q, policy, s);
            for (int c = 0; c < q; ++c)
                if (tau[c] != 0.0) data.features.add_row_to(i, tau[c], w.m.col(c));
            ++epoch_updates;
            stats.final_update_norm = std::sqrt(data.features.row_squared_norm(i));
        }
        stats.updates += epoch_updates;
        stats.epochs_or_iterations = epoch + 1;
        if (epoch_updates == 0) {
            stats.converged = true;
            break;
        }
    }
    return {std::move(w), stats};
}

} // namespace uma

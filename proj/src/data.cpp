#include "uma/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace uma {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

DenseMatrix draw_prototypes(int q, Eigen::Index dim, Rng& rng) {
    DenseMatrix w(dim, q);
    if (dim == 2) {
        for (int c = 0; c < q; ++c) {
            const double a = rng.uniform(0.0, kTwoPi);
            w(0, c) = std::cos(a);
            w(1, c) = std::sin(a);
        }
    } else {
        for (int c = 0; c < q; ++c) {
            Eigen::VectorXd v(dim);
            double norm = 0.0;
            do {
                for (Eigen::Index j = 0; j < dim; ++j) v[j] = rng.gaussian();
                norm = v.norm();
            } while (norm < 1e-12);
            w.col(c) = v / norm;
        }
    }
    return w;
}

int labelled_argmax(const Eigen::VectorXd& s) {
    int best = 0;
    for (Eigen::Index c = 1; c < s.size(); ++c)
        if (s[c] > s[best]) best = static_cast<int>(c);
    return best;
}

double margin_of(const Eigen::VectorXd& s, int y) {
    double rival = -std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < s.size(); ++c)
        if (static_cast<int>(c) != y && s[c] > rival) rival = s[c];
    return s[y] - rival;
}

// Scan the circle on a fine grid: does every class keep at least one point
// that clears the margin filter? Cheap rejection of hopeless prototype draws
// before any sampling happens (d=2 only).
bool all_classes_survive(const DenseMatrix& wstar, double theta) {
    constexpr int kGrid = 8192;
    std::vector<bool> seen(static_cast<std::size_t>(wstar.cols()), false);
    std::size_t found = 0;
    for (int g = 0; g < kGrid; ++g) {
        const double a = kTwoPi * (static_cast<double>(g) + 0.5) / kGrid;
        Eigen::VectorXd x(2);
        x << std::cos(a), std::sin(a);
        const Eigen::VectorXd s = wstar.transpose() * x;
        const int y = labelled_argmax(s);
        const double m = margin_of(s, y);
        if (m >= theta && m > 0.0 && !seen[static_cast<std::size_t>(y)]) {
            seen[static_cast<std::size_t>(y)] = true;
            if (++found == seen.size()) return true;
        }
    }
    return false;
}

} // namespace

std::pair<Dataset, WeightMatrix> generate_synthetic(int num_classes, Eigen::Index n_target,
                                                    double theta, std::uint64_t seed,
                                                    const SyntheticOptions& opts) {
    if (num_classes < 2) throw InputError("synthetic generator needs at least two classes");
    if (n_target < 1) throw InputError("n_target must be positive");
    if (theta < 0.0) throw InputError("theta must be nonnegative");
    if (opts.dim < 2) throw InputError("dimension must be at least 2");

    Rng rng(seed);
    const long max_prototype_draws = opts.dim == 2 ? 20000 : 200;

    for (long draw = 0; draw < max_prototype_draws; ++draw) {
        DenseMatrix wraw = draw_prototypes(num_classes, opts.dim, rng);
        DenseMatrix wstar = wraw / wraw.norm();
        if (opts.dim == 2 && !all_classes_survive(wstar, theta)) continue;

        DenseMatrix points(n_target, opts.dim);
        std::vector<int> labels(static_cast<std::size_t>(n_target));
        Eigen::Index got = 0;
        long attempts = 0;
        bool dead = false;
        while (got < n_target) {
            ++attempts;
            Eigen::VectorXd x(opts.dim);
            if (opts.dim == 2) {
                const double a = rng.uniform(0.0, kTwoPi);
                x << std::cos(a), std::sin(a);
            } else {
                double norm = 0.0;
                do {
                    for (Eigen::Index j = 0; j < opts.dim; ++j) x[j] = rng.gaussian();
                    norm = x.norm();
                } while (norm < 1e-12);
                x /= norm;
            }
            const Eigen::VectorXd s = wstar.transpose() * x;
            const int y = labelled_argmax(s);
            const double m = margin_of(s, y);
            if (m >= theta && m > 0.0) {
                points.row(got) = x.transpose();
                labels[static_cast<std::size_t>(got)] = y;
                ++got;
            }
            if (attempts >= 100000 && static_cast<double>(got) < 1e-4 * static_cast<double>(attempts))
                throw GenerationError("margin filter acceptance rate below 1e-4; theta too large");
            if (attempts > 400 * n_target + 200000) {
                dead = true; // absurdly low acceptance for this prototype draw; try another
                break;
            }
        }
        if (dead) continue;

        std::set<int> present(labels.begin(), labels.end());
        if (static_cast<int>(present.size()) != num_classes) continue;

        Dataset out;
        out.features = FeatureMatrix(std::move(points));
        out.observed = labels;
        out.truth = std::move(labels);
        out.num_classes = num_classes;
        out.validate();
        return {std::move(out), WeightMatrix{std::move(wstar)}};
    }
    throw GenerationError("no prototype draw kept every class alive under the margin filter");
}

Dataset sample_margin_points(const WeightMatrix& wstar, Eigen::Index n, double theta, Rng& rng,
                             int retries) {
    if (n < 1) throw InputError("sample size must be positive");
    const Eigen::Index dim = wstar.dim();
    const int q = static_cast<int>(wstar.num_classes());

    for (int attempt = 0; attempt < retries; ++attempt) {
        DenseMatrix points(n, dim);
        std::vector<int> labels(static_cast<std::size_t>(n));
        Eigen::Index got = 0;
        long draws = 0;
        while (got < n) {
            ++draws;
            Eigen::VectorXd x(dim);
            if (dim == 2) {
                const double a = rng.uniform(0.0, kTwoPi);
                x << std::cos(a), std::sin(a);
            } else {
                double norm = 0.0;
                do {
                    for (Eigen::Index j = 0; j < dim; ++j) x[j] = rng.gaussian();
                    norm = x.norm();
                } while (norm < 1e-12);
                x /= norm;
            }
            const Eigen::VectorXd s = wstar.m.transpose() * x;
            const int y = labelled_argmax(s);
            const double m = margin_of(s, y);
            if (m >= theta && m > 0.0) {
                points.row(got) = x.transpose();
                labels[static_cast<std::size_t>(got)] = y;
                ++got;
            }
            if (draws > 400 * n + 200000)
                throw GenerationError("margin filter acceptance too low for this weight matrix");
        }
        std::set<int> present(labels.begin(), labels.end());
        if (static_cast<int>(present.size()) != q) continue;

        Dataset out;
        out.features = FeatureMatrix(std::move(points));
        out.observed = labels;
        out.truth = std::move(labels);
        out.num_classes = q;
        out.validate();
        return out;
    }
    throw GenerationError("sampled sets kept missing a class after " + std::to_string(retries) +
                          " attempts");
}

namespace {

std::vector<std::string> split_line(const std::string& line, char delimiter) {
    std::vector<std::string> out;
    if (delimiter == ' ') {
        std::istringstream ss(line);
        std::string tok;
        while (ss >> tok) out.push_back(tok);
        return out;
    }
    std::string cur;
    for (char ch : line) {
        if (ch == delimiter) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

std::string strip(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

Dataset load_dense(const std::string& path, char delimiter, int label_column) {
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open " + path);

    std::vector<std::vector<double>> rows;
    std::vector<std::string> tokens;
    std::string line;
    long lineno = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = strip(line);
        if (t.empty()) continue;
        const auto cells = split_line(t, delimiter);
        if (width == 0) {
            width = cells.size();
            if (width < 2)
                throw IngestionError(path + ":" + std::to_string(lineno) +
                                     ": need at least one feature and a label");
        } else if (cells.size() != width) {
            throw IngestionError(path + ":" + std::to_string(lineno) + ": expected " +
                                 std::to_string(width) + " columns, got " +
                                 std::to_string(cells.size()));
        }
        const int lc = label_column >= 0 ? label_column : static_cast<int>(width) + label_column;
        if (lc < 0 || lc >= static_cast<int>(width))
            throw IngestionError(path + ":" + std::to_string(lineno) + ": label column out of range");

        std::vector<double> feats;
        feats.reserve(width - 1);
        for (std::size_t c = 0; c < width; ++c) {
            if (static_cast<int>(c) == lc) {
                tokens.push_back(strip(cells[c]));
                continue;
            }
            try {
                std::size_t used = 0;
                const double v = std::stod(cells[c], &used);
                if (used != cells[c].size() && !strip(cells[c].substr(used)).empty()) throw std::invalid_argument("");
                feats.push_back(v);
            } catch (const std::exception&) {
                throw IngestionError(path + ":" + std::to_string(lineno) + ": bad numeric value '" +
                                     cells[c] + "'");
            }
        }
        rows.push_back(std::move(feats));
    }
    if (rows.empty()) throw IngestionError(path + ": no data rows");

    // build the label vocabulary: numeric order when every token is an integer
    std::vector<std::string> vocab(tokens.begin(), tokens.end());
    std::sort(vocab.begin(), vocab.end());
    vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
    bool all_int = true;
    for (const auto& v : vocab) {
        try {
            std::size_t used = 0;
            (void)std::stol(v, &used);
            if (used != v.size()) all_int = false;
        } catch (const std::exception&) {
            all_int = false;
        }
        if (!all_int) break;
    }
    if (all_int)
        std::sort(vocab.begin(), vocab.end(),
                  [](const std::string& a, const std::string& b) { return std::stol(a) < std::stol(b); });

    DenseMatrix feats(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            feats(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];

    std::vector<int> labels(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto it = std::lower_bound(vocab.begin(), vocab.end(), tokens[i],
                                         [&](const std::string& a, const std::string& b) {
                                             if (all_int) return std::stol(a) < std::stol(b);
                                             return a < b;
                                         });
        labels[i] = static_cast<int>(it - vocab.begin());
    }

    Dataset out;
    out.features = FeatureMatrix(std::move(feats));
    out.observed = labels;
    out.truth = std::move(labels);
    out.num_classes = static_cast<int>(vocab.size());
    out.label_names = std::move(vocab);
    out.validate();
    return out;
}

Dataset load_sparse(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open " + path);

    std::vector<Eigen::Triplet<double>> trips;
    std::vector<int> labels;
    std::string line;
    long lineno = 0;
    Eigen::Index max_index = 0;
    int max_label = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = strip(line);
        if (t.empty()) continue;
        std::istringstream ss(t);
        long label = 0;
        if (!(ss >> label) || label < 1)
            throw IngestionError(path + ":" + std::to_string(lineno) + ": labels are 1-based integers");
        const int row = static_cast<int>(labels.size());
        labels.push_back(static_cast<int>(label) - 1);
        max_label = std::max(max_label, static_cast<int>(label));

        std::string pair;
        long prev = 0;
        while (ss >> pair) {
            const auto colon = pair.find(':');
            if (colon == std::string::npos)
                throw IngestionError(path + ":" + std::to_string(lineno) + ": expected idx:val, got '" +
                                     pair + "'");
            long idx = 0;
            double val = 0.0;
            try {
                idx = std::stol(pair.substr(0, colon));
                val = std::stod(pair.substr(colon + 1));
            } catch (const std::exception&) {
                throw IngestionError(path + ":" + std::to_string(lineno) + ": bad idx:val pair '" +
                                     pair + "'");
            }
            if (idx < 1)
                throw IngestionError(path + ":" + std::to_string(lineno) + ": indices are 1-based");
            if (idx <= prev)
                throw IngestionError(path + ":" + std::to_string(lineno) +
                                     ": indices must be strictly increasing (saw " +
                                     std::to_string(idx) + " after " + std::to_string(prev) + ")");
            prev = idx;
            max_index = std::max<Eigen::Index>(max_index, idx);
            trips.emplace_back(row, static_cast<int>(idx) - 1, val);
        }
    }
    if (labels.empty()) throw IngestionError(path + ": no data rows");

    SparseMatrix feats(static_cast<Eigen::Index>(labels.size()), max_index);
    feats.setFromTriplets(trips.begin(), trips.end());

    Dataset out;
    out.features = FeatureMatrix(std::move(feats));
    out.observed = labels;
    out.truth = std::move(labels);
    out.num_classes = max_label;
    out.validate();
    return out;
}

Dataset load_auto(const std::string& path, char delimiter, int label_column) {
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open " + path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        in.close();
        if (line.find(':') != std::string::npos) return load_sparse(path);
        return load_dense(path, delimiter, label_column);
    }
    throw IngestionError(path + " holds no data lines");
}

void save_sparse(const std::string& path, const Dataset& data) {
    std::ofstream out(path);
    if (!out) throw IngestionError("cannot open " + path + " for writing");
    char buf[64];
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        out << (data.observed[static_cast<std::size_t>(i)] + 1);
        const Eigen::VectorXd row = data.features.row_dense(i);
        for (Eigen::Index j = 0; j < row.size(); ++j) {
            if (row[j] == 0.0) continue;
            std::snprintf(buf, sizeof(buf), "%.17g", row[j]);
            out << ' ' << (j + 1) << ':' << buf;
        }
        out << '\n';
    }
    if (!out) throw IngestionError("write to " + path + " failed");
}

void save_dense(const std::string& path, const Dataset& data, char delimiter) {
    std::ofstream out(path);
    if (!out) throw IngestionError("cannot open " + path + " for writing");
    char buf[64];
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        const Eigen::VectorXd row = data.features.row_dense(i);
        for (Eigen::Index j = 0; j < row.size(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", row[j]);
            out << buf << delimiter;
        }
        out << (data.observed[static_cast<std::size_t>(i)] + 1) << '\n';
    }
    if (!out) throw IngestionError("write to " + path + " failed");
}

Dataset subset(const Dataset& data, const std::vector<Eigen::Index>& indices) {
    Dataset out;
    out.features = data.features.select_rows(indices);
    out.observed.reserve(indices.size());
    for (Eigen::Index i : indices) {
        if (i < 0 || i >= data.n()) throw InputError("subset index out of range");
        out.observed.push_back(data.observed[static_cast<std::size_t>(i)]);
    }
    if (data.truth) {
        std::vector<int> tr;
        tr.reserve(indices.size());
        for (Eigen::Index i : indices) tr.push_back((*data.truth)[static_cast<std::size_t>(i)]);
        out.truth = std::move(tr);
    }
    out.num_classes = data.num_classes;
    out.label_names = data.label_names;
    return out;
}

Dataset with_observed(const Dataset& data, std::vector<int> observed) {
    Dataset out = data;
    out.observed = std::move(observed);
    out.validate();
    return out;
}

std::pair<Dataset, Dataset> stratified_sample(const Dataset& data, Eigen::Index m_per_class,
                                              Rng& rng) {
    if (m_per_class < 1) throw InputError("m_per_class must be positive");
    const std::vector<int>& labels = data.truth ? *data.truth : data.observed;

    std::vector<std::vector<Eigen::Index>> by_class(static_cast<std::size_t>(data.num_classes));
    for (Eigen::Index i = 0; i < data.n(); ++i)
        by_class[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])].push_back(i);

    std::vector<Eigen::Index> chosen;
    for (int c = 0; c < data.num_classes; ++c) {
        auto& pool = by_class[static_cast<std::size_t>(c)];
        if (static_cast<Eigen::Index>(pool.size()) < m_per_class)
            throw SamplingError("class " + std::to_string(c + 1) + " has only " +
                                std::to_string(pool.size()) + " examples, need " +
                                std::to_string(m_per_class));
        const auto perm = rng.permutation(pool.size());
        for (Eigen::Index k = 0; k < m_per_class; ++k)
            chosen.push_back(pool[perm[static_cast<std::size_t>(k)]]);
    }
    std::sort(chosen.begin(), chosen.end());

    std::vector<Eigen::Index> rest;
    std::size_t c = 0;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        if (c < chosen.size() && chosen[c] == i)
            ++c;
        else
            rest.push_back(i);
    }
    return {subset(data, chosen), subset(data, rest)};
}

std::pair<Dataset, Dataset> holdout_split(const Dataset& data, double fraction, Rng& rng) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw InputError("fraction must lie in (0, 1)");
    const Eigen::Index n = data.n();
    const Eigen::Index k =
        static_cast<Eigen::Index>(std::ceil(fraction * static_cast<double>(n)));
    const auto perm = rng.permutation(static_cast<std::size_t>(n));
    std::vector<Eigen::Index> part(perm.begin(), perm.begin() + k);
    std::vector<Eigen::Index> rest(perm.begin() + k, perm.end());
    std::sort(part.begin(), part.end());
    std::sort(rest.begin(), rest.end());
    return {subset(data, part), subset(data, rest)};
}

} // namespace uma

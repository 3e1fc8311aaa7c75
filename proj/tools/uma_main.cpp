#include <CLI11.hpp>

#include <cstdio>
#include <deque>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "uma/data.hpp"
#include "uma/experiments.hpp"
#include "uma/kpca.hpp"
#include "uma/metrics.hpp"
#include "uma/noise.hpp"
#include "uma/rng.hpp"
#include "uma/ultra.hpp"
#include "uma/unconfused.hpp"

namespace {

uma::DenseMatrix read_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw uma::InputError("cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<double> row;
        std::istringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0')
                throw uma::InputError(path + ":" + std::to_string(lineno) + ": bad number '" +
                                      cell + "'");
            row.push_back(v);
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw uma::InputError(path + ":" + std::to_string(lineno) + ": ragged row");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw uma::InputError(path + " holds no rows");
    uma::DenseMatrix m(static_cast<Eigen::Index>(rows.size()),
                       static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

void write_matrix_csv(const std::string& path, const uma::DenseMatrix& m) {
    std::ofstream out(path);
    if (!out) throw uma::InputError("cannot open " + path + " for writing");
    char buf[40];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
            out << buf << (j + 1 < m.cols() ? "," : "");
        }
        out << '\n';
    }
    if (!out) throw uma::InputError("write to " + path + " failed");
}

void save_dataset(const std::string& path, const uma::Dataset& data, const std::string& format) {
    if (format == "sparse") uma::save_sparse(path, data);
    else if (format == "dense") uma::save_dense(path, data);
    else throw uma::InputError("unknown format '" + format + "' (sparse or dense)");
}

uma::SelectionStrategy parse_strategy(const std::string& v) {
    if (v == "error") return uma::SelectionStrategy::error;
    if (v == "confusion") return uma::SelectionStrategy::confusion;
    if (v == "random") return uma::SelectionStrategy::random;
    throw uma::InputError("unknown strategy '" + v + "'");
}

uma::TauPolicy parse_policy(const std::string& v) {
    if (v == "perceptron_single") return uma::TauPolicy::perceptron_single;
    if (v == "uniform_split") return uma::TauPolicy::uniform_split;
    throw uma::InputError("unknown policy '" + v + "'");
}

// Flags for the experiment subcommands are declared once per subcommand and
// funnelled through apply_setting, so the config file and the command line
// share one parser and one validation path. Flags win over the file.
struct ExperimentArgs {
    std::string config;
    std::deque<std::string> storage;
    std::vector<std::pair<std::string, std::string*>> keys;
    std::vector<CLI::Option*> options;

    void bind(CLI::App* cmd, const std::string& flag, const std::string& key,
              const std::string& help) {
        storage.emplace_back();
        options.push_back(cmd->add_option(flag, storage.back(), help));
        keys.emplace_back(key, &storage.back());
    }

    void attach(CLI::App* cmd, bool with_sweep_flags, bool with_pipeline_flags) {
        cmd->add_option("--config", config, "config file; flags override its values");
        bind(cmd, "--preset", "experiment.preset", "synthetic | digits | letters | custom");
        bind(cmd, "--seed", "experiment.seed", "base seed for every derived stream");
        bind(cmd, "--repeats", "experiment.repeats", "number of repetitions");
        bind(cmd, "--out", "experiment.out", "CSV report path (stdout when omitted)");
        bind(cmd, "--train", "experiment.train", "training data file (file presets)");
        bind(cmd, "--test", "experiment.test", "test data file (file presets)");
        bind(cmd, "--label-column", "experiment.label_column",
             "label column in dense files, negative counts from the end");
        if (with_sweep_flags)
            bind(cmd, "--indices", "experiment.noise_indices",
                 "comma-separated noise indices (default 1..20)");
        bind(cmd, "--alpha", "uma.alpha", "margin parameter");
        bind(cmd, "--stop-epsilon", "uma.stop_epsilon", "stop when the selected norm drops below");
        bind(cmd, "--max-updates", "uma.max_updates", "update budget");
        bind(cmd, "--strategy", "uma.strategy", "error | confusion | random");
        bind(cmd, "--policy", "uma.policy", "perceptron_single | uniform_split");
        bind(cmd, "--classes", "synthetic.classes", "synthetic class count");
        bind(cmd, "--train-size", "synthetic.train_size", "synthetic training points");
        bind(cmd, "--test-size", "synthetic.test_size", "synthetic test points");
        bind(cmd, "--theta", "synthetic.theta", "synthetic margin");
        bind(cmd, "--dim", "synthetic.dim", "synthetic dimension");
        if (with_pipeline_flags) {
            bind(cmd, "--m-per-class", "pipeline.m_per_class", "seed examples per class");
            bind(cmd, "--conf-fraction", "pipeline.conf_fraction",
                 "fraction held out to estimate the confusion");
            bind(cmd, "--ultra-epochs", "pipeline.ultra_max_epochs",
                 "epoch cap for the reference learners");
        }
        bind(cmd, "--kpca", "kpca.enabled", "project file data with kernel PCA first");
        bind(cmd, "--kpca-dim", "kpca.dim", "projection dimension");
        bind(cmd, "--kpca-sigma", "kpca.sigma", "kernel bandwidth (0 = median heuristic)");
    }

    uma::ExperimentConfig build(const std::string& kind) const {
        std::vector<std::pair<std::string, std::string>> file_pairs;
        if (!config.empty()) file_pairs = uma::parse_config_file(config);

        uma::ExperimentConfig cfg;
        cfg.kind = kind;
        for (const auto& [k, v] : file_pairs)
            if (k == "experiment.preset") cfg.preset = v;
        for (std::size_t i = 0; i < keys.size(); ++i)
            if (keys[i].first == "experiment.preset" && options[i]->count() > 0)
                cfg.preset = *keys[i].second;
        uma::apply_preset(cfg);

        for (const auto& [k, v] : file_pairs) {
            if (k == "experiment.preset" || k == "experiment.kind") continue;
            uma::apply_setting(cfg, k, v);
        }
        for (std::size_t i = 0; i < keys.size(); ++i) {
            if (options[i]->count() == 0 || keys[i].first == "experiment.preset") continue;
            uma::apply_setting(cfg, keys[i].first, *keys[i].second);
        }
        return cfg;
    }
};

void emit_report(const uma::ExperimentConfig& cfg, const uma::ExperimentReport& report) {
    if (cfg.out_path.empty()) {
        std::cout << report.to_csv();
    } else {
        report.save(cfg.out_path);
        std::cout << "wrote " << cfg.out_path << " (" << report.rows.size() << " rows)\n";
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ultraconservative multiclass learning under label noise"};
    app.require_subcommand(1);
    std::function<void()> action;

    // generate
    auto* gen = app.add_subcommand("generate", "sample a margin-separated synthetic dataset");
    struct {
        int classes = 10;
        long size = 1000;
        double theta = 0.025;
        long dim = 2;
        std::uint64_t seed = 1;
        std::string out, format = "sparse";
    } g;
    gen->add_option("--classes", g.classes, "number of classes");
    gen->add_option("--size", g.size, "number of points");
    gen->add_option("--theta", g.theta, "margin under the planted separator");
    gen->add_option("--dim", g.dim, "feature dimension");
    gen->add_option("--seed", g.seed, "seed");
    gen->add_option("--out", g.out, "output dataset path")->required();
    gen->add_option("--format", g.format, "sparse | dense");
    gen->callback([&] {
        action = [&] {
            uma::SyntheticOptions opts;
            opts.dim = g.dim;
            auto [data, wstar] = uma::generate_synthetic(g.classes, g.size, g.theta, g.seed, opts);
            save_dataset(g.out, data, g.format);
            std::cout << "wrote " << g.out << ": n=" << data.n() << " dim=" << data.dim()
                      << " classes=" << data.num_classes << '\n';
        };
    });

    // corrupt
    auto* cor = app.add_subcommand("corrupt", "relabel a dataset through a confusion matrix");
    struct {
        std::string in, out, save_confusion, format = "sparse";
        long index = 10;
        std::uint64_t seed = 1;
    } c;
    cor->add_option("--in", c.in, "input dataset")->required();
    cor->add_option("--out", c.out, "corrupted dataset path")->required();
    cor->add_option("--index", c.index, "family index i in Omega(I + i*N)");
    cor->add_option("--seed", c.seed, "seed for the family and the relabeling");
    cor->add_option("--save-confusion", c.save_confusion, "also write the applied matrix as CSV");
    cor->add_option("--format", c.format, "sparse | dense");
    cor->callback([&] {
        action = [&] {
            const uma::Dataset data = uma::load_auto(c.in);
            uma::Rng family_rng(uma::derive_seed(c.seed, 0, 0, 1));
            const uma::NoiseFamily family = uma::sample_reference(data.num_classes, family_rng);
            const uma::ConfusionMatrix conf = uma::confusion_at(family, c.index);
            uma::Rng corrupt_rng(uma::derive_seed(c.seed, 0, 0, 3));
            const std::vector<int>& base = data.truth ? *data.truth : data.observed;
            const uma::Dataset noisy =
                uma::with_observed(data, uma::corrupt_labels(base, conf, corrupt_rng));
            save_dataset(c.out, noisy, c.format);
            if (!c.save_confusion.empty()) write_matrix_csv(c.save_confusion, conf.matrix());
            long changed = 0;
            for (std::size_t i = 0; i < base.size(); ++i)
                if (base[i] != noisy.observed[i]) ++changed;
            std::cout << "wrote " << c.out << ": flipped " << changed << " of " << base.size()
                      << " labels\n";
        };
    });

    // train
    auto* tr = app.add_subcommand("train", "fit a linear multiclass model");
    struct {
        std::string in, out, confusion, algo = "uma";
        std::string strategy = "error", policy = "perceptron_single";
        double alpha = 0.0, stop_epsilon = 1e-3;
        long max_updates = 0, epochs = 1000;
        std::uint64_t seed = 1;
    } t;
    tr->add_option("--in", t.in, "training dataset")->required();
    tr->add_option("--out", t.out, "weight matrix CSV path")->required();
    tr->add_option("--algo", t.algo, "uma | ultra");
    tr->add_option("--confusion", t.confusion, "confusion matrix CSV (identity when omitted)");
    tr->add_option("--alpha", t.alpha, "margin parameter");
    tr->add_option("--stop-epsilon", t.stop_epsilon, "stop threshold on the selected norm");
    tr->add_option("--max-updates", t.max_updates, "update budget (0 picks the alpha default)");
    tr->add_option("--strategy", t.strategy, "error | confusion | random");
    tr->add_option("--policy", t.policy, "perceptron_single | uniform_split");
    tr->add_option("--epochs", t.epochs, "epoch cap for --algo ultra");
    tr->add_option("--seed", t.seed, "seed (random strategy)");
    tr->callback([&] {
        action = [&] {
            const uma::Dataset data = uma::load_auto(t.in);
            uma::WeightMatrix w{uma::DenseMatrix()};
            uma::TrainStats stats;
            if (t.algo == "ultra") {
                std::tie(w, stats) =
                    uma::train_ultraconservative(data, parse_policy(t.policy), t.alpha, t.epochs);
            } else if (t.algo == "uma") {
                uma::UmaConfig uc;
                uc.strategy = parse_strategy(t.strategy);
                uc.policy = parse_policy(t.policy);
                uc.alpha = t.alpha;
                uc.stop_epsilon = t.stop_epsilon;
                uc.max_updates =
                    t.max_updates > 0 ? t.max_updates : uma::default_max_updates(t.alpha);
                uc.seed = t.seed;
                const uma::ConfusionMatrix conf =
                    t.confusion.empty() ? uma::ConfusionMatrix::identity(data.num_classes)
                                        : uma::invert_confusion(read_matrix_csv(t.confusion));
                std::tie(w, stats) = uma::train_uma(data, conf, uc);
            } else {
                throw uma::InputError("unknown algorithm '" + t.algo + "' (uma or ultra)");
            }
            write_matrix_csv(t.out, w.m);
            std::printf("wrote %s: updates=%ld sweeps=%ld final_norm=%.17g converged=%s\n",
                        t.out.c_str(), stats.updates, stats.epochs_or_iterations,
                        stats.final_update_norm, stats.converged ? "yes" : "no");
        };
    });

    // eval
    auto* ev = app.add_subcommand("eval", "score a saved model on a labelled dataset");
    struct {
        std::string model, data;
    } e;
    ev->add_option("--model", e.model, "weight matrix CSV")->required();
    ev->add_option("--data", e.data, "labelled dataset")->required();
    ev->callback([&] {
        action = [&] {
            const uma::Dataset data = uma::load_auto(e.data);
            const uma::WeightMatrix w{read_matrix_csv(e.model)};
            if (w.dim() != data.dim())
                throw uma::InputError("model dimension " + std::to_string(w.dim()) +
                                      " does not match data dimension " +
                                      std::to_string(data.dim()));
            const std::vector<int>& truth = data.truth ? *data.truth : data.observed;
            const std::vector<int> preds = uma::predict_all(w, data.features);
            std::printf("n=%ld error_rate=%.17g", static_cast<long>(data.n()),
                        uma::error_rate(preds, truth));
            try {
                const double conf = uma::confusion_rate(
                    uma::recall_confusion(preds, truth, data.num_classes));
                std::printf(" confusion_rate=%.17g\n", conf);
            } catch (const uma::MissingClass&) {
                std::printf(" confusion_rate=undefined (some class absent)\n");
            }
        };
    });

    // kpca
    auto* kp = app.add_subcommand("kpca", "kernel-PCA project datasets onto training axes");
    struct {
        std::string in, out, apply, apply_out;
        long dim = 0;
        double sigma = 0.0;
        std::uint64_t seed = 1;
    } k;
    kp->add_option("--in", k.in, "dataset the projection is fitted on")->required();
    kp->add_option("--out", k.out, "projected fit dataset (dense CSV)")->required();
    kp->add_option("--dim", k.dim, "number of principal axes")->required();
    kp->add_option("--apply", k.apply, "second dataset to project with the same axes");
    kp->add_option("--apply-out", k.apply_out, "output path for --apply");
    kp->add_option("--sigma", k.sigma, "kernel bandwidth (0 = median heuristic)");
    kp->add_option("--seed", k.seed, "seed for the bandwidth subsample");
    kp->callback([&] {
        action = [&] {
            if (!k.apply.empty() && k.apply_out.empty())
                throw uma::InputError("--apply needs --apply-out");
            const uma::Dataset fit = uma::load_auto(k.in);
            const uma::DenseMatrix x = fit.features.to_dense();
            double sigma = k.sigma;
            if (sigma <= 0.0) {
                uma::Rng rng(uma::derive_seed(k.seed, 0, 0, 9));
                sigma = uma::median_bandwidth(x, rng);
            }
            const uma::KpcaProjector proj =
                uma::kpca_fit(x, sigma, std::min<Eigen::Index>(k.dim, x.rows()));
            auto project = [&](const uma::Dataset& d) {
                uma::DenseMatrix p = uma::kpca_transform(proj, d.features.to_dense());
                for (Eigen::Index i = 0; i < p.rows(); ++i) {
                    const double norm = p.row(i).norm();
                    if (norm > 0.0) p.row(i) /= norm;
                }
                uma::Dataset out = d;
                out.features = uma::FeatureMatrix(std::move(p));
                return out;
            };
            uma::save_dense(k.out, project(fit));
            std::cout << "wrote " << k.out << ": dim=" << proj.output_dim()
                      << " sigma=" << sigma << '\n';
            if (!k.apply.empty()) {
                uma::save_dense(k.apply_out, project(uma::load_auto(k.apply)));
                std::cout << "wrote " << k.apply_out << '\n';
            }
        };
    });

    // experiment drivers
    ExperimentArgs sweep_noise_args, sweep_approx_args, pipeline_args, strategy_args;

    auto* sn = app.add_subcommand("sweep-noise",
                                  "corrupt at each index, train with the true matrix and with "
                                  "identity, report confusion rates");
    sweep_noise_args.attach(sn, true, false);
    sn->callback([&] {
        action = [&] {
            const uma::ExperimentConfig cfg = sweep_noise_args.build("sweep-noise");
            emit_report(cfg, uma::run_noise_sweep(cfg));
        };
    });

    auto* sa = app.add_subcommand("sweep-approx",
                                  "corrupt once, train believing each index, report confusion "
                                  "against the approximation factor");
    sweep_approx_args.attach(sa, true, false);
    sa->callback([&] {
        action = [&] {
            const uma::ExperimentConfig cfg = sweep_approx_args.build("sweep-approx");
            emit_report(cfg, uma::run_approximation_sweep(cfg));
        };
    });

    auto* pl = app.add_subcommand("pipeline",
                                  "five-step weak supervision: seed sample, rough classifier, "
                                  "estimated confusion, noise-robust training, baselines");
    pipeline_args.attach(pl, false, true);
    pl->callback([&] {
        action = [&] {
            const uma::ExperimentConfig cfg = pipeline_args.build("pipeline");
            emit_report(cfg, uma::run_pipeline(cfg));
        };
    });

    auto* st = app.add_subcommand("strategy-study",
                                  "train per selection strategy on identical data, logging "
                                  "error and confusion after every update");
    strategy_args.attach(st, false, false);
    st->callback([&] {
        action = [&] {
            const uma::ExperimentConfig cfg = strategy_args.build("strategy-study");
            emit_report(cfg, uma::run_strategy_study(cfg));
        };
    });

    try {
        app.parse(argc, argv);
        if (action) action();
    } catch (const CLI::ParseError& err) {
        const int rc = app.exit(err);
        return rc == 0 ? 0 : 1;
    } catch (const uma::Error& err) {
        std::cerr << "error: " << err.what() << '\n';
        return err.exit_code();
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 1;
    }
    return 0;
}

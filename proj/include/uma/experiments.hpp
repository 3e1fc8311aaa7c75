#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "uma/core.hpp"
#include "uma/unconfused.hpp"

namespace uma {

// Everything a run needs, overridable from a config file and then from flags.
// train_size 0 means "pick the preset default" (1000 for sweeps, 4000 for the
// synthetic pipeline).
struct ExperimentConfig {
    std::string kind;               // sweep-noise | sweep-approx | pipeline | strategy-study
    std::string preset = "synthetic"; // synthetic | digits | letters | custom
    std::string train_path;
    std::string test_path;
    std::string out_path;
    int label_column = -1; // for dense files; letters preset flips it to 0
    std::uint64_t seed = 1;
    int repeats = 10;
    std::vector<long> noise_indices; // empty means 1..20

    UmaConfig uma;

    int num_classes = 10;
    Eigen::Index train_size = 0;
    Eigen::Index test_size = 10000;
    double theta = 0.025;
    Eigen::Index dim = 2;

    Eigen::Index m_per_class = 10;
    double conf_fraction = 0.05;
    long ultra_max_epochs = 100;

    bool use_kpca = false;
    Eigen::Index kpca_dim = 0; // 0 with use_kpca set is an error; presets fill it
    double kpca_sigma = 0.0;   // 0 means median heuristic
};

// A named-column table of doubles. CSV serialization uses %.17g so parsing an
// emitted report reproduces it exactly.
struct ExperimentReport {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::string to_csv() const;
    static ExperimentReport from_csv(const std::string& text);
    void save(const std::string& path) const;
    static ExperimentReport load(const std::string& path);

    Eigen::Index column(const std::string& name) const; // throws InputError when absent
    bool operator==(const ExperimentReport&) const = default;
};

// [section] headers plus key = value lines; returns dotted keys in file order.
// '#' and ';' start comments.
std::vector<std::pair<std::string, std::string>> parse_config_file(const std::string& path);

// Applies one dotted key ("uma.alpha", "experiment.repeats", ...) to the
// config; unknown keys and unparsable values throw InputError.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

// digits / letters install their kernel-projection and sampling defaults;
// synthetic and custom change nothing
void apply_preset(ExperimentConfig& config);

// Corrupt synthetic data with each family member C_i, train with the true C_i
// and with identity (the noise-blind baseline), and compare test confusion
// rates. One row per i.
ExperimentReport run_noise_sweep(const ExperimentConfig& config);

// Corrupt once with the i=10 member, then train believing each C_i in turn;
// one row per i with its approximation factor.
ExperimentReport run_approximation_sweep(const ExperimentConfig& config);

// The five-step weakly supervised protocol: a rough classifier from a tiny
// stratified sample labels the rest, its estimated confusion drives the
// noise-robust learner, and the reference learners train alongside. One row
// per repetition; a row is flagged when the confusion estimate stayed
// singular after the retry (its uma column is then -1).
ExperimentReport run_pipeline(const ExperimentConfig& config);

// Trains one run per selection strategy on identical data and logs test error
// and confusion rate after every update. Strategy codes: 0 error, 1 confusion,
// 2 random.
ExperimentReport run_strategy_study(const ExperimentConfig& config);

} // namespace uma

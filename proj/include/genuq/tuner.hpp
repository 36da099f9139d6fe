#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "genuq/trainer.hpp"

namespace genuq {

struct SearchSpace {
    std::vector<int> widths{32, 64, 128};
    std::vector<int> depths{1, 2};
    std::vector<int> batch_sizes{32, 64};
    double lr_min = 1e-4, lr_max = 1e-2;          // log-uniform
    double dropout_min = 0.01, dropout_max = 0.3; // uniform
    int n_trials = 10;
    int max_epochs = 1000;

    void validate() const;
    std::size_t grid_size() const;
};

struct TrialConfig {
    int trial_id = 0;
    int depth = 1;
    int width = 32;
    int batch_size = 32;
    double lr = 1e-3;
    double dropout = 0.0;

    nlohmann::json to_json() const;
};

struct TrialResult {
    TrialConfig config;
    std::string status;  // "ok" | "failed"
    std::string message; // failure diagnostic
    double best_val_loss = 0.0;
    double r2 = 0.0;     // validation-scatter R^2 on the trial's split
    TrainReport report;
};

// Structural triple = grid cell (trial_index mod grid size), cells
// enumerated lexicographically over (depths, widths, batch_sizes); lr and
// dropout drawn from a stream keyed by (seed, trial_index). When n_trials
// is below the grid size the cells are visited in that fixed order.
TrialConfig sample_trial(const SearchSpace& space, int trial_index, std::uint64_t seed);

struct SearchOutcome {
    std::vector<TrialResult> results;  // ordered by trial id
    int best_trial = -1;
    GeneratorModel best_model;

    nlohmann::json to_json() const;      // search summary (includes timings)
    nlohmann::json best_config() const;  // reusable config fragment
};

// Runs n_trials independent train calls across at most `parallelism`
// workers. Each trial derives its own training seed from (seed, trial);
// results are identical for any worker count. Best = lowest
// best-validation-loss among ok trials, ties broken by lower trial id.
SearchOutcome run_search(const std::vector<LabeledTriple>& triples, const SearchSpace& space,
                         int parallelism, std::uint64_t seed, const TrainConfig& base);

}  // namespace genuq

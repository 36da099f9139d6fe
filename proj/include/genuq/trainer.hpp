#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "genuq/flow.hpp"
#include "genuq/network.hpp"

namespace genuq {

struct TrainConfig {
    double lr = 1e-3;
    int batch_size = 64;
    int max_epochs = 1000;
    double val_fraction = 0.1;
    double min_delta = 1e-5;   // absolute improvement in standardized-loss units
    int patience = 20;
    double gap_threshold = 0.1;
    int ma_window = 5;         // trend-rule moving-average window
    std::uint64_t seed = 0;

    void validate() const;
};

struct TrainReport {
    std::vector<double> train_loss;  // per-epoch averages
    std::vector<double> val_loss;    // full-pass eval-mode loss per epoch
    int best_epoch = -1;             // 0-based index of the checkpointed epoch
    std::string stop_reason;         // "max_epochs" | "trend_stop"
    double generalization_gap = 0.0; // val - train at the best epoch
    bool gap_flagged = false;        // any epoch gap exceeded gap_threshold
    double wall_seconds = 0.0;
    std::vector<std::size_t> val_indices;  // rows of the input triple list; not serialized

    int epochs_run() const { return static_cast<int>(train_loss.size()); }
    nlohmann::json to_json() const;
};

struct StopDecision {
    bool stop = false;
    std::string reason;
};

// Trend rule: stop once, for `patience` consecutive epochs, the train-loss
// moving average strictly decreased while the validation-loss moving
// average strictly increased. Averages use the last min(epoch, window)
// entries; the rule is evaluated from the first epoch with a full window.
// The generalization gap is a recorded diagnostic and never stops a run by
// itself.
StopDecision should_stop(const std::vector<double>& train_loss,
                         const std::vector<double>& val_loss, const TrainConfig& cfg);

// Seeded shuffle-split into train/validation; minibatch Adam per epoch; a
// model snapshot is retained whenever validation loss improves on the best
// so far by more than min_delta. Returns the best snapshot, never the
// last-epoch model.
std::pair<GeneratorModel, TrainReport> train(const std::vector<LabeledTriple>& triples,
                                             const Architecture& arch, const TrainConfig& cfg);

// Checkpoint persistence (magic "GQUQ"): byte-exact round trip of every
// parameter, scaler statistic, and provenance field.
void save_checkpoint(const GeneratorModel& model, const std::string& path);
GeneratorModel load_checkpoint(const std::string& path);

}  // namespace genuq

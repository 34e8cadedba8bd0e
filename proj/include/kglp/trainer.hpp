#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "kglp/model.hpp"

namespace kglp {

/// One training stage of the three-stage schedule.
struct StageConfig {
    double alpha = 1.0;
    bool use_precision = false;  // stage 1: off, stages 2-3: on
    std::size_t epochs = 1;
    std::size_t batch_size = 160;
    double threshold = 0.5;
};

enum class GateMode : std::uint8_t {
    Epochs,  // run each stage for its configured epoch budget
    Recall,  // additionally exit stage 1 once holdout recall >= 0.85
};

const char* to_string(GateMode mode);
GateMode gate_mode_from_string(std::string_view s);

/// Holdout recall that ends stage 1 in recall-gate mode.
constexpr double kRecallGate = 0.85;

struct TrainConfig {
    std::vector<StageConfig> stages;
    LrSchedule schedule;
    std::uint64_t seed = 1;
    double holdout_fraction = 0.1;  // deterministic seeded split, never test data
    std::size_t accumulation = 1;   // micro-batches per parameter update
    GateMode gate_mode = GateMode::Epochs;
    bool reset_schedule_per_stage = false;
};

struct EpochRecord {
    std::size_t stage = 0;  // 1-based
    std::size_t epoch = 0;  // 1-based within the stage
    std::size_t global_step = 0;
    double mean_loss = 0.0;
    double holdout_recall = 0.0;
    double holdout_p1 = 0.0;
};

struct StageRecord {
    std::size_t stage = 0;
    double alpha = 0.0;
    bool use_precision = false;
    std::size_t epochs_run = 0;
    std::string trigger;  // "epoch_budget" or "recall_gate"
};

struct StageLog {
    std::vector<EpochRecord> epochs;
    std::vector<StageRecord> stages;

    void write_jsonl(std::ostream& out) const;
};

struct TrainResult {
    ModelParams params;
    StageLog log;
};

/// Runs the staged schedule with plain SGD under the warmup schedule. The
/// scheduler step counter is global across stages unless reset_schedule_per_stage
/// is set. Holdout metrics drive the recall gate; when the holdout fraction
/// rounds down to zero samples the training set itself is measured instead.
/// A non-finite loss aborts with stage/epoch context.
TrainResult train(ModelParams params, std::vector<EncodedSample> data,
                  const TrainConfig& config);

}  // namespace kglp

#include "kglp/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "kglp/metrics.hpp"

namespace kglp {

const char* to_string(GateMode mode) {
    return mode == GateMode::Epochs ? "epochs" : "recall";
}

GateMode gate_mode_from_string(std::string_view s) {
    if (s == "epochs") return GateMode::Epochs;
    if (s == "recall") return GateMode::Recall;
    throw std::runtime_error("unknown gate_mode: " + std::string(s));
}

void StageLog::write_jsonl(std::ostream& out) const {
    auto emit_stage_end = [&](const StageRecord& s) {
        nlohmann::json j{{"event", "stage_end"},
                         {"stage", s.stage},
                         {"alpha", s.alpha},
                         {"use_precision", s.use_precision},
                         {"epochs_run", s.epochs_run},
                         {"trigger", s.trigger}};
        out << j.dump() << '\n';
    };
    // epochs of a stage, then its end record; zero-epoch stages only get the latter
    std::size_t next_stage = 0;
    for (const EpochRecord& e : epochs) {
        while (next_stage < stages.size() && stages[next_stage].stage < e.stage)
            emit_stage_end(stages[next_stage++]);
        nlohmann::json j{{"event", "epoch"},
                         {"stage", e.stage},
                         {"epoch", e.epoch},
                         {"global_step", e.global_step},
                         {"mean_loss", e.mean_loss},
                         {"holdout_recall", e.holdout_recall},
                         {"holdout_p1", e.holdout_p1}};
        out << j.dump() << '\n';
    }
    while (next_stage < stages.size()) emit_stage_end(stages[next_stage++]);
}

namespace {

void apply_update(ModelParams& params, const Gradients& grad, double lr) {
    for (std::size_t i = 0; i < params.token_embeddings.data.size(); ++i)
        params.token_embeddings.data[i] -= lr * grad.token_embeddings.data[i];
    for (std::size_t i = 0; i < params.classifier_weights.data.size(); ++i)
        params.classifier_weights.data[i] -= lr * grad.classifier_weights.data[i];
    for (std::size_t i = 0; i < params.classifier_bias.size(); ++i)
        params.classifier_bias[i] -= lr * grad.classifier_bias[i];
}

}  // namespace

TrainResult train(ModelParams params, std::vector<EncodedSample> data,
                  const TrainConfig& config) {
    if (config.stages.empty()) throw std::runtime_error("train: at least one stage required");
    if (data.empty()) throw std::runtime_error("train: empty training data");
    for (std::size_t i = 0; i < config.stages.size(); ++i) {
        const StageConfig& s = config.stages[i];
        if (s.batch_size < 1 || s.alpha <= 0.0 || s.threshold <= 0.0 || s.threshold >= 1.0)
            throw std::runtime_error("train: invalid stage " + std::to_string(i + 1) +
                                     " (batch_size >= 1, alpha > 0, threshold in (0,1))");
    }

    std::mt19937_64 rng(config.seed);

    // Deterministic holdout split; the gate never sees test data.
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t holdout_count =
        static_cast<std::size_t>(config.holdout_fraction * static_cast<double>(data.size()));
    std::vector<EncodedSample> holdout, training;
    holdout.reserve(holdout_count);
    training.reserve(data.size() - holdout_count);
    for (std::size_t i = 0; i < order.size(); ++i)
        (i < holdout_count ? holdout : training).push_back(std::move(data[order[i]]));
    if (training.empty()) throw std::runtime_error("train: holdout fraction leaves no training data");
    const std::vector<EncodedSample>& measured = holdout.empty() ? training : holdout;

    StageLog log;
    std::size_t global_step = 0;
    const std::size_t ks[] = {1};

    std::vector<std::size_t> batch_order(training.size());
    std::iota(batch_order.begin(), batch_order.end(), 0);

    for (std::size_t stage_idx = 0; stage_idx < config.stages.size(); ++stage_idx) {
        const StageConfig& stage = config.stages[stage_idx];
        if (config.reset_schedule_per_stage) global_step = 0;
        StageRecord record;
        record.stage = stage_idx + 1;
        record.alpha = stage.alpha;
        record.use_precision = stage.use_precision;
        record.trigger = "epoch_budget";

        for (std::size_t epoch = 1; epoch <= stage.epochs; ++epoch) {
            std::shuffle(batch_order.begin(), batch_order.end(), rng);

            double loss_sum = 0.0;
            std::size_t batches = 0;
            Gradients accum = Gradients::zeros_like(params);
            std::size_t pending = 0;

            auto flush = [&]() {
                if (pending == 0) return;
                accum.scale(1.0 / static_cast<double>(pending));
                apply_update(params, accum, lr_at(++global_step, config.schedule));
                accum.scale(0.0);
                pending = 0;
            };

            std::vector<EncodedSample> batch;
            for (std::size_t start = 0; start < batch_order.size(); start += stage.batch_size) {
                std::size_t end = std::min(start + stage.batch_size, batch_order.size());
                batch.clear();
                for (std::size_t i = start; i < end; ++i)
                    batch.push_back(training[batch_order[i]]);
                BatchResult br = batch_loss_and_gradients(params, batch, stage.alpha,
                                                          stage.use_precision, stage.threshold);
                if (!std::isfinite(br.loss))
                    throw std::runtime_error("train: non-finite loss at stage " +
                                             std::to_string(stage_idx + 1) + " epoch " +
                                             std::to_string(epoch));
                loss_sum += br.loss;
                ++batches;
                accum.add_scaled(br.gradients, 1.0);
                if (++pending == config.accumulation) flush();
            }
            flush();

            EvalReport eval = evaluate(params, measured, ks, stage.threshold);
            EpochRecord er;
            er.stage = stage_idx + 1;
            er.epoch = epoch;
            er.global_step = global_step;
            er.mean_loss = batches ? loss_sum / static_cast<double>(batches) : 0.0;
            er.holdout_recall = eval.recall;
            er.holdout_p1 = eval.p_at.at(1);
            log.epochs.push_back(er);
            record.epochs_run = epoch;

            bool gated = config.gate_mode == GateMode::Recall && stage_idx == 0 &&
                         eval.recall >= kRecallGate;
            if (gated) {
                record.trigger = "recall_gate";
                break;
            }
        }
        log.stages.push_back(record);
    }
    return {std::move(params), std::move(log)};
}

}  // namespace kglp

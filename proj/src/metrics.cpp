#include "kglp/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace kglp {

std::vector<std::size_t> top_k_indices(std::span<const double> scores, std::size_t k) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + k, order.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (scores[a] != scores[b]) return scores[a] > scores[b];
                          return a < b;
                      });
    order.resize(k);
    return order;
}

double precision_at_k(std::span<const double> scores, std::span<const std::uint8_t> true_labels,
                      std::size_t k) {
    if (k == 0) throw std::runtime_error("precision_at_k: k must be >= 1");
    if (k > scores.size())
        throw std::runtime_error("precision_at_k: k exceeds the score vector length");
    if (scores.size() != true_labels.size())
        throw std::runtime_error("precision_at_k: size mismatch");
    std::size_t hits = 0;
    for (std::size_t idx : top_k_indices(scores, k))
        if (true_labels[idx]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(k);
}

double recall_at_threshold(std::span<const double> y_hat, std::span<const std::uint8_t> y,
                           double threshold) {
    if (y_hat.size() != y.size()) throw std::runtime_error("recall_at_threshold: size mismatch");
    std::size_t positives = 0, hits = 0;
    for (std::size_t j = 0; j < y.size(); ++j) {
        if (!y[j]) continue;
        ++positives;
        if (y_hat[j] >= threshold) ++hits;
    }
    if (positives == 0) return 1.0;
    return static_cast<double>(hits) / static_cast<double>(positives);
}

EvalReport evaluate(const ModelParams& params, std::span<const EncodedSample> samples,
                    std::span<const std::size_t> ks, double threshold) {
    if (samples.empty()) throw std::runtime_error("evaluate: empty sample set");
    EvalReport report;
    report.n_samples = samples.size();
    for (std::size_t k : ks) report.p_at[k] = 0.0;

    const std::size_t n_labels = params.n_labels();
    std::vector<std::uint8_t> y(n_labels);
    std::size_t micro_positives = 0, micro_hits = 0;
    double macro_recall_sum = 0.0;

    for (const EncodedSample& sample : samples) {
        std::fill(y.begin(), y.end(), 0);
        for (std::uint32_t c : sample.positive_columns) y[c] = 1;
        std::vector<double> scores = predict(params, sample.token_ids);
        for (std::size_t k : ks) report.p_at[k] += precision_at_k(scores, y, k);
        for (std::size_t j = 0; j < n_labels; ++j) {
            if (!y[j]) continue;
            ++micro_positives;
            if (scores[j] >= threshold) ++micro_hits;
        }
        macro_recall_sum += recall_at_threshold(scores, y, threshold);
    }
    for (auto& [k, sum] : report.p_at) sum /= static_cast<double>(samples.size());
    report.recall = micro_positives == 0
                        ? 1.0
                        : static_cast<double>(micro_hits) / static_cast<double>(micro_positives);
    report.macro_recall = macro_recall_sum / static_cast<double>(samples.size());
    return report;
}

std::string EvalReport::to_json() const {
    nlohmann::json j;
    for (const auto& [k, v] : p_at) j["p_at"][std::to_string(k)] = v;
    j["recall"] = recall;
    j["macro_recall"] = macro_recall;
    j["n_samples"] = n_samples;
    j["fingerprint"] = fingerprint;
    return j.dump(2);
}

std::string EvalReport::to_table() const {
    std::string header, row;
    for (const auto& [k, v] : p_at) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "P@%zu", k);
        header += std::string(buf) + "\t";
        std::snprintf(buf, sizeof(buf), "%.4f", v);
        row += std::string(buf) + "\t";
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", recall);
    return header + "recall\tn\n" + row + buf + "\t" + std::to_string(n_samples) + "\n";
}

}  // namespace kglp

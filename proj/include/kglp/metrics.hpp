#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "kglp/model.hpp"

namespace kglp {

struct EvalReport {
    std::map<std::size_t, double> p_at;  // k -> macro P@k
    double recall = 0.0;                 // micro, at the binarization threshold
    double macro_recall = 0.0;           // per-sample mean, diagnostic
    std::size_t n_samples = 0;
    std::string fingerprint;

    std::string to_json() const;
    std::string to_table() const;  // human-readable P@1/P@3/P@5 row
};

/// Indices of the top-k scores, descending, ties by ascending index.
std::vector<std::size_t> top_k_indices(std::span<const double> scores, std::size_t k);

/// Fraction of the top-k indices that are true labels. `true_labels` is a
/// binary mask over the score vector. Throws when k > |scores| or k == 0.
double precision_at_k(std::span<const double> scores, std::span<const std::uint8_t> true_labels,
                      std::size_t k);

/// |{j : y_hat_j >= threshold, y_j = 1}| / |{j : y_j = 1}|; 1.0 when y has
/// no positives.
double recall_at_threshold(std::span<const double> y_hat, std::span<const std::uint8_t> y,
                           double threshold);

/// Macro-averaged P@k and micro recall over an encoded sample set.
/// Throws on an empty set.
EvalReport evaluate(const ModelParams& params, std::span<const EncodedSample> samples,
                    std::span<const std::size_t> ks, double threshold = 0.5);

}  // namespace kglp

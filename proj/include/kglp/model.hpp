#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace kglp {

/// Row-major dense matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double* row(std::size_t r) { return data.data() + r * cols; }
    const double* row(std::size_t r) const { return data.data() + r * cols; }
    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

/// Token vocabulary for the desk-scale encoder. Id 0 is the reserved [UNK]
/// row every unseen token maps to.
class TokenVocab {
public:
    TokenVocab();

    std::uint32_t add(const std::string& token);
    std::uint32_t id(const std::string& token) const;  // kUnk when unseen
    const std::string& token(std::uint32_t id) const { return tokens_[id]; }
    std::size_t size() const { return tokens_.size(); }

    static constexpr std::uint32_t kUnk = 0;

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, std::uint32_t> ids_;
};

/// Token-embedding table plus the extreme classification layer.
struct ModelParams {
    Matrix token_embeddings;      // vocab_size x b
    Matrix classifier_weights;    // k x b
    std::vector<double> classifier_bias;  // k

    std::size_t embedding_dim() const { return token_embeddings.cols; }
    std::size_t n_labels() const { return classifier_weights.rows; }

    /// Uniform(-scale, scale) init, deterministic for a given seed.
    static ModelParams init(std::size_t vocab_size, std::size_t embedding_dim,
                            std::size_t n_labels, std::uint64_t seed, double scale = 0.05);
};

/// Mean of the token-embedding rows; the empty sequence encodes to zero.
std::vector<double> encode(std::span<const std::uint32_t> token_ids, const ModelParams& params);

/// Logits are clamped to |z| <= 30 before the logistic so the log terms of
/// the losses stay finite.
constexpr double kLogitClamp = 30.0;

/// y_hat_j = logistic(w_j . encode(tokens) + b_j), in (0, 1)^k.
std::vector<double> predict(const ModelParams& params, std::span<const std::uint32_t> token_ids);

/// Mean over label components of -[alpha y log(y_hat) + (1-y) log(1-y_hat)].
/// Components outside (0, 1) throw; clamp logits, not probabilities.
double loss_stage1(std::span<const double> y_hat, std::span<const std::uint8_t> y, double alpha);

/// p = |{j : y_hat_j >= threshold} ∩ true| / |{j : y_hat_j >= threshold}|,
/// 0 when nothing is predicted.
double sample_precision(std::span<const double> y_hat, std::span<const std::uint8_t> y,
                        double threshold);

/// Stage-2/3 loss for one sample: loss_stage1 scaled by 1/max(p, 0.01).
double loss_stage23(std::span<const double> y_hat, std::span<const std::uint8_t> y, double alpha,
                    double threshold);

/// One training sample after tokenization and label binarization.
struct EncodedSample {
    std::vector<std::uint32_t> token_ids;
    std::vector<std::uint32_t> positive_columns;  // sorted ascending
};

struct Gradients {
    Matrix token_embeddings;
    Matrix classifier_weights;
    std::vector<double> classifier_bias;

    static Gradients zeros_like(const ModelParams& params);
    void add_scaled(const Gradients& other, double scale);
    void scale(double factor);
    double max_abs() const;
};

/// Mean loss over the batch plus exact analytic gradients. When
/// `use_precision` is set, each sample's term is scaled by 1/max(p, 0.01)
/// with the coefficient treated as a constant (stop-gradient). Non-finite
/// intermediates throw.
struct BatchResult {
    double loss = 0.0;
    Gradients gradients;
};
BatchResult batch_loss_and_gradients(const ModelParams& params,
                                     std::span<const EncodedSample> batch, double alpha,
                                     bool use_precision, double threshold);

/// Inverse-square-root warmup schedule with the 1/2 factor:
/// rate = 1/(2 sqrt(d_model)) * min(step^-1/2, step * warmup^-1.5); rate(0)=0.
struct LrSchedule {
    std::size_t d_model = 768;
    std::size_t warmup = 12000;
};

double lr_at(std::size_t step, const LrSchedule& schedule);

}  // namespace kglp

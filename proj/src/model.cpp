#include "kglp/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace kglp {

TokenVocab::TokenVocab() {
    tokens_.push_back("[UNK]");
    ids_.emplace("[UNK]", kUnk);
}

std::uint32_t TokenVocab::add(const std::string& token) {
    auto [it, inserted] = ids_.emplace(token, static_cast<std::uint32_t>(tokens_.size()));
    if (inserted) tokens_.push_back(token);
    return it->second;
}

std::uint32_t TokenVocab::id(const std::string& token) const {
    auto it = ids_.find(token);
    return it == ids_.end() ? kUnk : it->second;
}

ModelParams ModelParams::init(std::size_t vocab_size, std::size_t embedding_dim,
                              std::size_t n_labels, std::uint64_t seed, double scale) {
    ModelParams params;
    params.token_embeddings = Matrix(vocab_size, embedding_dim);
    params.classifier_weights = Matrix(n_labels, embedding_dim);
    params.classifier_bias.assign(n_labels, 0.0);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-scale, scale);
    for (double& v : params.token_embeddings.data) v = dist(rng);
    for (double& v : params.classifier_weights.data) v = dist(rng);
    return params;
}

std::vector<double> encode(std::span<const std::uint32_t> token_ids, const ModelParams& params) {
    std::vector<double> out(params.embedding_dim(), 0.0);
    if (token_ids.empty()) return out;
    for (std::uint32_t id : token_ids) {
        const double* row = params.token_embeddings.row(id);
        for (std::size_t d = 0; d < out.size(); ++d) out[d] += row[d];
    }
    double inv = 1.0 / static_cast<double>(token_ids.size());
    for (double& v : out) v *= inv;
    return out;
}

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::vector<double> predict_from_encoding(const ModelParams& params,
                                          const std::vector<double>& enc) {
    std::vector<double> y_hat(params.n_labels());
    for (std::size_t j = 0; j < y_hat.size(); ++j) {
        const double* w = params.classifier_weights.row(j);
        double z = params.classifier_bias[j];
        for (std::size_t d = 0; d < enc.size(); ++d) z += w[d] * enc[d];
        y_hat[j] = logistic(std::clamp(z, -kLogitClamp, kLogitClamp));
    }
    return y_hat;
}

}  // namespace

std::vector<double> predict(const ModelParams& params, std::span<const std::uint32_t> token_ids) {
    return predict_from_encoding(params, encode(token_ids, params));
}

double loss_stage1(std::span<const double> y_hat, std::span<const std::uint8_t> y, double alpha) {
    if (y_hat.size() != y.size()) throw std::runtime_error("loss: vector size mismatch");
    if (y_hat.empty()) throw std::runtime_error("loss: empty vectors");
    double sum = 0.0;
    for (std::size_t j = 0; j < y_hat.size(); ++j) {
        double p = y_hat[j];
        if (!(p > 0.0 && p < 1.0))
            throw std::runtime_error("loss: predicted probability outside (0,1); "
                                     "clamp logits, not probabilities");
        sum += y[j] ? -alpha * std::log(p) : -std::log1p(-p);
    }
    return sum / static_cast<double>(y_hat.size());
}

double sample_precision(std::span<const double> y_hat, std::span<const std::uint8_t> y,
                        double threshold) {
    std::size_t predicted = 0, hits = 0;
    for (std::size_t j = 0; j < y_hat.size(); ++j) {
        if (y_hat[j] >= threshold) {
            ++predicted;
            if (y[j]) ++hits;
        }
    }
    if (predicted == 0) return 0.0;
    return static_cast<double>(hits) / static_cast<double>(predicted);
}

double loss_stage23(std::span<const double> y_hat, std::span<const std::uint8_t> y, double alpha,
                    double threshold) {
    double p = sample_precision(y_hat, y, threshold);
    return loss_stage1(y_hat, y, alpha) / std::max(p, 0.01);
}

Gradients Gradients::zeros_like(const ModelParams& params) {
    Gradients g;
    g.token_embeddings = Matrix(params.token_embeddings.rows, params.token_embeddings.cols);
    g.classifier_weights = Matrix(params.classifier_weights.rows, params.classifier_weights.cols);
    g.classifier_bias.assign(params.classifier_bias.size(), 0.0);
    return g;
}

void Gradients::add_scaled(const Gradients& other, double scale) {
    for (std::size_t i = 0; i < token_embeddings.data.size(); ++i)
        token_embeddings.data[i] += scale * other.token_embeddings.data[i];
    for (std::size_t i = 0; i < classifier_weights.data.size(); ++i)
        classifier_weights.data[i] += scale * other.classifier_weights.data[i];
    for (std::size_t i = 0; i < classifier_bias.size(); ++i)
        classifier_bias[i] += scale * other.classifier_bias[i];
}

void Gradients::scale(double factor) {
    for (double& v : token_embeddings.data) v *= factor;
    for (double& v : classifier_weights.data) v *= factor;
    for (double& v : classifier_bias) v *= factor;
}

double Gradients::max_abs() const {
    double m = 0.0;
    for (double v : token_embeddings.data) m = std::max(m, std::fabs(v));
    for (double v : classifier_weights.data) m = std::max(m, std::fabs(v));
    for (double v : classifier_bias) m = std::max(m, std::fabs(v));
    return m;
}

BatchResult batch_loss_and_gradients(const ModelParams& params,
                                     std::span<const EncodedSample> batch, double alpha,
                                     bool use_precision, double threshold) {
    if (batch.empty()) throw std::runtime_error("batch_loss_and_gradients: empty batch");
    const std::size_t k = params.n_labels();
    const std::size_t b = params.embedding_dim();

    BatchResult result;
    result.gradients = Gradients::zeros_like(params);
    double inv_batch = 1.0 / static_cast<double>(batch.size());

    std::vector<std::uint8_t> y(k);
    std::vector<double> dz(k);
    std::vector<double> d_enc(b);

    for (const EncodedSample& sample : batch) {
        std::fill(y.begin(), y.end(), 0);
        for (std::uint32_t c : sample.positive_columns) y[c] = 1;

        std::vector<double> enc = encode(sample.token_ids, params);
        std::vector<double> y_hat(k);
        for (std::size_t j = 0; j < k; ++j) {
            const double* w = params.classifier_weights.row(j);
            double z = params.classifier_bias[j];
            for (std::size_t d = 0; d < b; ++d) z += w[d] * enc[d];
            y_hat[j] = logistic(std::clamp(z, -kLogitClamp, kLogitClamp));
        }

        double sample_loss = loss_stage1(y_hat, y, alpha);
        double coeff = 1.0;
        if (use_precision)
            coeff = 1.0 / std::max(sample_precision(y_hat, y, threshold), 0.01);
        if (!std::isfinite(sample_loss))
            throw std::runtime_error("batch_loss_and_gradients: non-finite loss");
        result.loss += coeff * sample_loss * inv_batch;

        // dL/dz_j of the per-sample mean-over-k loss. The clamp is treated as
        // identity here (straight-through): beyond it the logistic is already
        // saturated, and a zeroed gradient would leave overshoot logits stuck.
        double scale = coeff * inv_batch / static_cast<double>(k);
        for (std::size_t j = 0; j < k; ++j)
            dz[j] = scale * (y[j] ? -alpha * (1.0 - y_hat[j]) : y_hat[j]);

        std::fill(d_enc.begin(), d_enc.end(), 0.0);
        for (std::size_t j = 0; j < k; ++j) {
            if (dz[j] == 0.0) continue;
            result.gradients.classifier_bias[j] += dz[j];
            double* gw = result.gradients.classifier_weights.row(j);
            const double* w = params.classifier_weights.row(j);
            for (std::size_t d = 0; d < b; ++d) {
                gw[d] += dz[j] * enc[d];
                d_enc[d] += dz[j] * w[d];
            }
        }

        if (!sample.token_ids.empty()) {
            double inv_len = 1.0 / static_cast<double>(sample.token_ids.size());
            for (std::uint32_t id : sample.token_ids) {
                double* ge = result.gradients.token_embeddings.row(id);
                for (std::size_t d = 0; d < b; ++d) ge[d] += d_enc[d] * inv_len;
            }
        }
    }
    return result;
}

double lr_at(std::size_t step, const LrSchedule& schedule) {
    if (step == 0) return 0.0;
    double s = static_cast<double>(step);
    double warmup = static_cast<double>(schedule.warmup);
    double decay = 1.0 / std::sqrt(s);
    double ramp = s * std::pow(warmup, -1.5);
    return std::min(decay, ramp) / (2.0 * std::sqrt(static_cast<double>(schedule.d_model)));
}

}  // namespace kglp

#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "kglp/model.hpp"

using namespace kglp;

namespace {

// Independent high-precision evaluation of the staged losses, written as a
// direct transcription of the formulas in long double.
long double reference_stage1(const std::vector<double>& y_hat, const std::vector<std::uint8_t>& y,
                             double alpha) {
    long double sum = 0.0L;
    for (std::size_t j = 0; j < y_hat.size(); ++j) {
        long double p = y_hat[j];
        if (y[j])
            sum += -static_cast<long double>(alpha) * std::log(p);
        else
            sum += -std::log(1.0L - p);
    }
    return sum / static_cast<long double>(y_hat.size());
}

long double reference_stage23(const std::vector<double>& y_hat,
                              const std::vector<std::uint8_t>& y, double alpha,
                              double threshold) {
    std::size_t predicted = 0, hits = 0;
    for (std::size_t j = 0; j < y_hat.size(); ++j) {
        if (y_hat[j] >= threshold) {
            ++predicted;
            if (y[j]) ++hits;
        }
    }
    long double p = predicted == 0 ? 0.0L
                                   : static_cast<long double>(hits) /
                                         static_cast<long double>(predicted);
    long double coeff = 1.0L / std::max(p, 0.01L);
    return coeff * reference_stage1(y_hat, y, alpha);
}

ModelParams tiny_params(std::mt19937_64& rng, std::size_t vocab, std::size_t b, std::size_t k,
                        double scale = 0.1) {
    auto params = ModelParams::init(vocab, b, k, rng());
    std::uniform_real_distribution<double> dist(-scale, scale);
    for (auto& v : params.token_embeddings.data) v = dist(rng);
    for (auto& v : params.classifier_weights.data) v = dist(rng);
    for (auto& v : params.classifier_bias) v = dist(rng);
    return params;
}

std::vector<EncodedSample> tiny_batch(std::mt19937_64& rng, std::size_t n, std::size_t vocab,
                                      std::size_t k) {
    std::uniform_int_distribution<std::uint32_t> tok(0, static_cast<std::uint32_t>(vocab - 1));
    std::uniform_int_distribution<std::size_t> len(1, 6);
    std::bernoulli_distribution positive(0.4);
    std::vector<EncodedSample> batch(n);
    for (auto& sample : batch) {
        std::size_t l = len(rng);
        for (std::size_t i = 0; i < l; ++i) sample.token_ids.push_back(tok(rng));
        for (std::uint32_t c = 0; c < k; ++c)
            if (positive(rng)) sample.positive_columns.push_back(c);
    }
    return batch;
}

double batch_loss_only(const ModelParams& params, std::span<const EncodedSample> batch,
                       double alpha, bool use_precision, double threshold) {
    double total = 0.0;
    std::vector<std::uint8_t> y(params.n_labels());
    for (const auto& sample : batch) {
        std::fill(y.begin(), y.end(), 0);
        for (auto c : sample.positive_columns) y[c] = 1;
        auto y_hat = predict(params, sample.token_ids);
        total += use_precision ? loss_stage23(y_hat, y, alpha, threshold)
                               : loss_stage1(y_hat, y, alpha);
    }
    return total / static_cast<double>(batch.size());
}

// Central finite differences over every parameter of a tiny model. The error
// is measured relative to the gradient vector's max-norm: the FD noise floor
// scales with the loss magnitude, so a per-component denominator would be
// unattainable for near-zero components at large alpha.
double max_relative_fd_error(ModelParams params, const std::vector<EncodedSample>& batch,
                             double alpha, bool use_precision, double threshold) {
    const double h = 1e-5;
    auto analytic = batch_loss_and_gradients(params, batch, alpha, use_precision, threshold);
    double worst_abs = 0.0;
    double scale = std::max(analytic.gradients.max_abs(), 1e-12);
    auto probe = [&](double* value, double analytic_grad) {
        double saved = *value;
        *value = saved + h;
        double up = batch_loss_only(params, batch, alpha, use_precision, threshold);
        *value = saved - h;
        double down = batch_loss_only(params, batch, alpha, use_precision, threshold);
        *value = saved;
        double fd = (up - down) / (2.0 * h);
        scale = std::max(scale, std::fabs(fd));
        worst_abs = std::max(worst_abs, std::fabs(fd - analytic_grad));
    };
    for (std::size_t i = 0; i < params.token_embeddings.data.size(); ++i)
        probe(&params.token_embeddings.data[i], analytic.gradients.token_embeddings.data[i]);
    for (std::size_t i = 0; i < params.classifier_weights.data.size(); ++i)
        probe(&params.classifier_weights.data[i], analytic.gradients.classifier_weights.data[i]);
    for (std::size_t i = 0; i < params.classifier_bias.size(); ++i)
        probe(&params.classifier_bias[i], analytic.gradients.classifier_bias[i]);
    return worst_abs / scale;
}

}  // namespace

TEST_CASE("worked loss values match independent evaluation") {
    // alpha multiplies only the positive term
    std::vector<double> y_half{0.5};
    std::vector<std::uint8_t> one{1}, zero{0};
    CHECK(loss_stage1(y_half, one, 2.0) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
    CHECK(loss_stage1(y_half, one, 2.0) == doctest::Approx(1.386294).epsilon(1e-5));
    CHECK(loss_stage1(y_half, zero, 2.0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(loss_stage1(y_half, zero, 123.0) == doctest::Approx(0.693147).epsilon(1e-5));

    // y=(1,0), y_hat=(0.6,0.7), alpha=2, threshold 0.5 -> p=1/2, coeff=2
    std::vector<double> y_hat{0.6, 0.7};
    std::vector<std::uint8_t> y{1, 0};
    double expected = 2.0 * 0.5 * (-2.0 * std::log(0.6) - std::log(0.3));
    CHECK(loss_stage23(y_hat, y, 2.0, 0.5) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(loss_stage23(y_hat, y, 2.0, 0.5) == doctest::Approx(2.22562).epsilon(1e-5));
}

TEST_CASE("perfect positive prediction drives the loss to zero") {
    for (double eps : {1e-3, 1e-6, 1e-9}) {
        std::vector<double> y_hat{1.0 - eps};
        std::vector<std::uint8_t> y{1};
        CHECK(loss_stage1(y_hat, y, 1.0) < 10 * eps);
    }
}

TEST_CASE("losses reject probabilities outside (0,1)") {
    std::vector<std::uint8_t> y{1};
    std::vector<double> zero{0.0}, one{1.0};
    CHECK_THROWS_AS(loss_stage1(zero, y, 1.0), std::runtime_error);
    CHECK_THROWS_AS(loss_stage1(one, y, 1.0), std::runtime_error);
    std::vector<double> ok{0.5}, bad_size{0.5, 0.5};
    CHECK_THROWS_AS(loss_stage1(bad_size, y, 1.0), std::runtime_error);
    CHECK_NOTHROW(loss_stage1(ok, y, 1.0));
}

TEST_CASE("random instances match the reference to 1e-9 relative") {
    std::mt19937_64 rng(61);
    std::uniform_int_distribution<std::size_t> k_dist(1, 12);
    std::uniform_real_distribution<double> p_dist(1e-6, 1.0 - 1e-6);
    std::uniform_real_distribution<double> alpha_dist(0.5, 30000.0);
    std::bernoulli_distribution label(0.5);
    for (int trial = 0; trial < 1000; ++trial) {
        std::size_t k = k_dist(rng);
        std::vector<double> y_hat(k);
        std::vector<std::uint8_t> y(k);
        for (std::size_t j = 0; j < k; ++j) {
            y_hat[j] = p_dist(rng);
            y[j] = label(rng);
        }
        double alpha = alpha_dist(rng);
        double got1 = loss_stage1(y_hat, y, alpha);
        long double want1 = reference_stage1(y_hat, y, alpha);
        CHECK(std::fabs(got1 - static_cast<double>(want1)) <=
              1e-9 * std::max(1.0L, std::fabs(want1)));
        double got23 = loss_stage23(y_hat, y, alpha, 0.5);
        long double want23 = reference_stage23(y_hat, y, alpha, 0.5);
        CHECK(std::fabs(got23 - static_cast<double>(want23)) <=
              1e-9 * std::max(1.0L, std::fabs(want23)));
    }
}

TEST_CASE("sample precision follows the predicted-set definition") {
    std::vector<double> y_hat{0.6, 0.7};
    std::vector<std::uint8_t> y{1, 0};
    CHECK(sample_precision(y_hat, y, 0.5) == doctest::Approx(0.5));

    std::vector<double> low{0.1, 0.2};
    CHECK(sample_precision(low, y, 0.5) == 0.0);  // empty prediction

    std::vector<double> exact{0.9, 0.1};
    CHECK(sample_precision(exact, y, 0.5) == 1.0);
    // p=1 makes the staged loss coincide with the stage-1 loss
    CHECK(loss_stage23(exact, y, 3.0, 0.5) == loss_stage1(exact, y, 3.0));

    // clamp: p=0 -> coefficient 100 exactly
    std::vector<std::uint8_t> y2{1, 1};
    CHECK(loss_stage23(low, y2, 1.0, 0.5) ==
          doctest::Approx(100.0 * loss_stage1(low, y2, 1.0)).epsilon(1e-12));
}

TEST_CASE("loss positivity and stage ordering") {
    std::mt19937_64 rng(67);
    std::uniform_real_distribution<double> p_dist(0.01, 0.99);
    std::bernoulli_distribution label(0.5);
    for (int trial = 0; trial < 300; ++trial) {
        std::size_t k = 1 + trial % 8;
        std::vector<double> y_hat(k);
        std::vector<std::uint8_t> y(k);
        for (std::size_t j = 0; j < k; ++j) {
            y_hat[j] = p_dist(rng);
            y[j] = label(rng);
        }
        double s1 = loss_stage1(y_hat, y, 5.0);
        double s23 = loss_stage23(y_hat, y, 5.0, 0.5);
        CHECK(s1 >= 0.0);
        CHECK(s23 >= s1 - 1e-15);  // coefficient is always >= 1
    }
}

TEST_CASE("stage-1 loss is strictly increasing in alpha with a positive label") {
    std::vector<double> y_hat{0.8, 0.3};
    std::vector<std::uint8_t> y{1, 0};
    double prev = loss_stage1(y_hat, y, 1.0);
    for (double alpha : {2.0, 20.0, 100.0, 30000.0}) {
        double cur = loss_stage1(y_hat, y, alpha);
        CHECK(cur > prev);
        prev = cur;
    }
}

TEST_CASE("encode is the arithmetic mean of embedding rows") {
    ModelParams params = ModelParams::init(4, 3, 2, 99);
    std::vector<std::uint32_t> single{2};
    auto enc = encode(single, params);
    for (std::size_t d = 0; d < 3; ++d)
        CHECK(enc[d] == params.token_embeddings.at(2, d));

    std::vector<std::uint32_t> pair{1, 3};
    auto mean = encode(pair, params);
    for (std::size_t d = 0; d < 3; ++d)
        CHECK(mean[d] == doctest::Approx((params.token_embeddings.at(1, d) +
                                          params.token_embeddings.at(3, d)) /
                                         2.0));

    std::vector<std::uint32_t> permuted{3, 1};
    CHECK(encode(permuted, params) == mean);

    std::vector<std::uint32_t> empty;
    for (double v : encode(empty, params)) CHECK(v == 0.0);
}

TEST_CASE("predict matches scalar recomputation and the zero case") {
    ModelParams zero = ModelParams::init(3, 2, 4, 1, 0.0);
    std::vector<std::uint32_t> tokens{0, 1};
    for (double p : predict(zero, tokens)) CHECK(p == doctest::Approx(0.5));

    std::mt19937_64 rng(71);
    ModelParams params = tiny_params(rng, 3, 2, 3);
    auto enc = encode(tokens, params);
    auto y_hat = predict(params, tokens);
    for (std::size_t j = 0; j < 3; ++j) {
        double z = params.classifier_bias[j];
        for (std::size_t d = 0; d < 2; ++d) z += params.classifier_weights.at(j, d) * enc[d];
        double expected = 1.0 / (1.0 + std::exp(-z));
        CHECK(std::fabs(y_hat[j] - expected) <= 1e-12 * std::max(1.0, std::fabs(expected)));
    }

    // monotone in bias
    ModelParams biased = zero;
    double prev = 0.5;
    for (double b : {1.0, 5.0, 20.0}) {
        biased.classifier_bias[0] = b;
        double p = predict(biased, tokens)[0];
        CHECK(p > prev);
        prev = p;
    }
    CHECK(prev < 1.0);
}

TEST_CASE("analytic gradients match central finite differences") {
    std::mt19937_64 rng(73);
    // threshold away from 0.5 keeps the precision coefficient locally
    // constant under the probe, matching the stop-gradient definition
    const double threshold = 0.2;
    for (int trial = 0; trial < 12; ++trial) {
        std::size_t vocab = 2 + trial % 4;
        std::size_t b = 1 + trial % 3;
        std::size_t k = 1 + trial % 5;
        auto params = tiny_params(rng, vocab, b, k);
        auto batch = tiny_batch(rng, 1 + trial % 3, vocab, k);
        for (double alpha : {1.0, 20.0, 100.0, 30000.0}) {
            CHECK(max_relative_fd_error(params, batch, alpha, false, threshold) <= 1e-5);
            CHECK(max_relative_fd_error(params, batch, alpha, true, threshold) <= 1e-5);
        }
    }
}

TEST_CASE("gradient scales linearly in alpha when all labels are positive") {
    std::mt19937_64 rng(79);
    auto params = tiny_params(rng, 4, 3, 3);
    std::vector<EncodedSample> batch(1);
    batch[0].token_ids = {0, 1, 2};
    batch[0].positive_columns = {0, 1, 2};  // all ones
    auto g1 = batch_loss_and_gradients(params, batch, 1.0, false, 0.5);
    auto g10 = batch_loss_and_gradients(params, batch, 10.0, false, 0.5);
    for (std::size_t i = 0; i < g1.gradients.classifier_bias.size(); ++i)
        CHECK(g10.gradients.classifier_bias[i] ==
              doctest::Approx(10.0 * g1.gradients.classifier_bias[i]).epsilon(1e-12));
    for (std::size_t i = 0; i < g1.gradients.classifier_weights.data.size(); ++i)
        CHECK(g10.gradients.classifier_weights.data[i] ==
              doctest::Approx(10.0 * g1.gradients.classifier_weights.data[i]).epsilon(1e-12));
}

TEST_CASE("confident correct predictions have vanishing gradients") {
    ModelParams params = ModelParams::init(2, 2, 2, 5, 0.0);
    params.classifier_bias = {25.0, -25.0};  // inside the clamp, saturated logistic
    std::vector<EncodedSample> batch(1);
    batch[0].token_ids = {0};
    batch[0].positive_columns = {0};
    auto result = batch_loss_and_gradients(params, batch, 1.0, false, 0.5);
    CHECK(result.gradients.max_abs() < 1e-9);
}

TEST_CASE("learning-rate schedule follows the half inverse-root form") {
    LrSchedule schedule;  // d_model=768, warmup=12000
    CHECK(lr_at(0, schedule) == 0.0);
    CHECK(lr_at(12000, schedule) == doctest::Approx(1.6471e-4).epsilon(1e-4));
    CHECK(std::fabs(lr_at(12000, schedule) - 1.6471e-4) <= 1e-8);

    // continuity at warmup: both branches coincide
    double before = lr_at(11999, schedule);
    double at = lr_at(12000, schedule);
    double after = lr_at(12001, schedule);
    CHECK(std::fabs(before - at) < 1e-7);
    CHECK(std::fabs(after - at) < 1e-7);

    // monotone up to warmup, monotone down after
    double prev = lr_at(0, schedule);
    for (std::size_t step = 1; step <= 12000; ++step) {
        double cur = lr_at(step, schedule);
        CHECK(cur >= prev);
        prev = cur;
    }
    for (std::size_t step = 12001; step <= 50000; ++step) {
        double cur = lr_at(step, schedule);
        CHECK(cur <= prev);
        prev = cur;
    }

    // inverse-sqrt decay identity: quadrupling the step halves the peak
    CHECK(lr_at(48000, schedule) == doctest::Approx(0.5 * lr_at(12000, schedule)).epsilon(1e-12));
}

#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace kglp {

/// (text, text) -> finite score, higher = more similar. Deterministic for
/// fixed provider state. A provider that cannot take concurrent score calls
/// reports concurrent_safe() == false and the assembly pipeline serializes.
class SimilarityProvider {
public:
    virtual ~SimilarityProvider() = default;
    virtual double score(std::string_view a, std::string_view b) const = 0;
    virtual bool concurrent_safe() const { return true; }
    virtual std::string name() const = 0;
};

/// Cosine similarity of character-3-gram frequency vectors, in [0, 1].
/// Texts with no 3-gram score 0 against everything.
class NgramCosineProvider : public SimilarityProvider {
public:
    double score(std::string_view a, std::string_view b) const override;
    std::string name() const override { return "ngram"; }
};

/// Scores by cosine over vectors loaded from a file: one row per line,
/// key text, tab, space-separated decimal floats, all rows one dimension.
/// A text without a row is a provider failure (throws).
class PrecomputedVectorProvider : public SimilarityProvider {
public:
    static PrecomputedVectorProvider load(const std::string& path);

    double score(std::string_view a, std::string_view b) const override;
    std::string name() const override { return "vectors"; }

    std::size_t dimension() const { return dimension_; }
    std::size_t size() const { return vectors_.size(); }

private:
    std::unordered_map<std::string, std::vector<double>> vectors_;
    std::size_t dimension_ = 0;
};

/// Scores every pair 0. Sorting is stable, so assembly degenerates to the
/// fixed insertion order (the random-sampling ablation with a frozen order).
class ConstantProvider : public SimilarityProvider {
public:
    explicit ConstantProvider(double value = 0.0) : value_(value) {}
    double score(std::string_view, std::string_view) const override { return value_; }
    std::string name() const override { return "constant"; }

private:
    double value_;
};

double ngram_cosine(std::string_view a, std::string_view b);

}  // namespace kglp

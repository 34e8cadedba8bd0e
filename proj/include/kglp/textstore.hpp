#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "kglp/graph.hpp"

namespace kglp {

/// Entity descriptions keyed by id. Lookup of an absent entity yields the
/// empty string and bumps a miss counter; it is never an error.
class DescriptionStore {
public:
    DescriptionStore() = default;
    DescriptionStore(DescriptionStore&& other) noexcept
        : texts_(std::move(other.texts_)),
          overwrites_(other.overwrites_),
          misses_(other.misses_.load(std::memory_order_relaxed)) {}
    DescriptionStore& operator=(DescriptionStore&& other) noexcept {
        texts_ = std::move(other.texts_);
        overwrites_ = other.overwrites_;
        misses_.store(other.misses_.load(std::memory_order_relaxed), std::memory_order_relaxed);
        return *this;
    }

    void put(EntityId entity, std::string text);
    const std::string& get(EntityId entity) const;
    bool has(EntityId entity) const { return texts_.contains(entity); }
    std::size_t size() const { return texts_.size(); }

    std::uint64_t misses() const { return misses_.load(std::memory_order_relaxed); }
    std::size_t overwrites() const { return overwrites_; }

    const std::unordered_map<EntityId, std::string>& all() const { return texts_; }

private:
    std::unordered_map<EntityId, std::string> texts_;
    std::size_t overwrites_ = 0;
    mutable std::atomic<std::uint64_t> misses_{0};
    static const std::string kEmpty;
};

/// 2-column TSV entity \t description. A duplicate key overwrites the earlier
/// value; the store counts how often that happened.
DescriptionStore load_descriptions(const std::string& path, Interners& interners);
DescriptionStore parse_descriptions(std::istream& in, Interners& interners,
                                    const std::string& source);

/// Keeps the content before the first ';', with trailing whitespace trimmed.
/// Text without a semicolon comes back whole. Idempotent.
std::string shorten_description(std::string_view text);

/// The batch form: a copy of the store with every description shortened.
DescriptionStore shorten_all(const DescriptionStore& store);

/// text -> ordered token list. [CLS], [SEP] and [MASK] are single tokens, and
/// every registered atom (an interned entity surface form) is emitted as one
/// token even when it contains spaces.
class Tokenizer {
public:
    virtual ~Tokenizer() = default;
    virtual std::vector<std::string> tokenize(std::string_view text) const = 0;
};

/// Whitespace splitter with leftmost-longest merging of registered multi-word
/// atoms. Single-word atoms need no registration; they are tokens already.
class WhitespaceTokenizer : public Tokenizer {
public:
    void add_atom(std::string_view surface);
    void add_entity_atoms(const SymbolTable& entities);

    std::vector<std::string> tokenize(std::string_view text) const override;

private:
    std::unordered_set<std::string> atoms_;
    std::size_t max_atom_words_ = 1;
};

std::size_t count_tokens(std::string_view text, const Tokenizer& tokenizer);

/// Mean token count over the descriptions present in the store.
double mean_description_tokens(const DescriptionStore& store, const Tokenizer& tokenizer);

}  // namespace kglp

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "kglp/graph.hpp"

namespace kglp {

enum class MaskedSide : std::uint8_t { Head, Tail };

const char* to_string(MaskedSide side);
MaskedSide masked_side_from_string(std::string_view s);

/// (MASK, r, given) when masked_side == Head, (given, r, MASK) when Tail.
struct IncompletePattern {
    RelationId relation;
    EntityId given;
    MaskedSide masked_side;

    friend bool operator==(const IncompletePattern&, const IncompletePattern&) = default;
};

/// One incomplete pattern with every entity that completes it in the split.
/// Labels are deduplicated and kept in first-occurrence order.
struct MultiLabelSample {
    IncompletePattern pattern;
    std::vector<EntityId> labels;
};

struct SampleSet {
    std::vector<MultiLabelSample> samples;
};

/// Groups triples by incomplete pattern. Both masked sides are generated for
/// every triple (tail-masked first); samples appear in first-occurrence order
/// of the pattern.
SampleSet build_samples(std::span<const Triple> triples);

/// The ordered label space Z: distinct training entities, first-occurrence
/// order over (head, tail) per triple. Columns are a bijection onto [0, k).
class EntityIndex {
public:
    static EntityIndex from_triples(std::span<const Triple> triples);

    std::size_t k() const { return entities_.size(); }
    const std::vector<EntityId>& entities() const { return entities_; }

    /// Column of an indexed entity, or npos when absent.
    std::uint32_t column(EntityId entity) const;

    static constexpr std::uint32_t npos = 0xffffffffu;

private:
    std::vector<EntityId> entities_;
    std::unordered_map<EntityId, std::uint32_t> columns_;
};

struct LabelVector {
    std::vector<std::uint8_t> bits;  // length k
    std::size_t dropped = 0;         // labels outside the index (test mode)
};

enum class LabelMode : std::uint8_t {
    Train,  // unindexed label is an error
    Test,   // unindexed labels are dropped and counted
};

/// Binary label vector in B^k for a sample. In Train mode an out-of-index
/// label throws, naming the offending entity via `interners`.
LabelVector label_vector(const MultiLabelSample& sample, const EntityIndex& index,
                         LabelMode mode, const Interners& interners);

/// Positive columns only, same dropping rules; order follows sample labels.
struct PositiveColumns {
    std::vector<std::uint32_t> columns;
    std::size_t dropped = 0;
};
PositiveColumns positive_columns(const MultiLabelSample& sample, const EntityIndex& index,
                                 LabelMode mode, const Interners& interners);

/// JSONL: one {"given","labels","masked_side","relation"} object per line,
/// surface forms throughout.
void write_samples_jsonl(std::ostream& out, const SampleSet& set, const Interners& interners);

/// Reads the JSONL form back, interning any unseen surface forms. Skips a
/// leading toolkit metadata line when present.
SampleSet read_samples_jsonl(std::istream& in, Interners& interners, const std::string& source);

}  // namespace kglp

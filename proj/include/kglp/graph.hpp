#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace kglp {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

/// Dense-id string interner. Ids are assigned in first-seen order and are
/// contiguous in [0, size()).
class SymbolTable {
public:
    std::uint32_t intern(std::string_view surface);

    /// Id of an already-interned surface form, or npos if unseen.
    std::uint32_t lookup(std::string_view surface) const;

    const std::string& name(std::uint32_t id) const;
    std::size_t size() const { return names_.size(); }

    static constexpr std::uint32_t npos = 0xffffffffu;

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, std::uint32_t> ids_;
};

/// Directed edge head -> tail. Direction is never normalized away.
struct Triple {
    EntityId head;
    RelationId relation;
    EntityId tail;

    friend bool operator==(const Triple&, const Triple&) = default;
};

enum class Role : std::uint8_t { Head, Tail };

/// A triple incident to a queried node, annotated with the node's role in it.
struct OneHopTriple {
    Triple triple;
    std::uint32_t triple_index;  // position in the source triple list
    Role role;                   // role of the queried node in `triple`
};

/// Immutable adjacency index over an ordered triple list. A self-loop is
/// stored once per role, so it appears twice in its endpoint's list.
class KnowledgeGraph {
public:
    KnowledgeGraph(std::vector<Triple> triples, std::size_t n_entities);

    const std::vector<Triple>& triples() const { return triples_; }
    std::size_t n_entities() const { return adjacency_.size(); }

    /// Every triple incident to `node`, in insertion order.
    /// Throws if `node` was not interned when the graph was built.
    std::vector<OneHopTriple> one_hop(EntityId node) const;

    /// Incident-edge count of `node`; a self-loop contributes 2.
    std::size_t degree(EntityId node) const;

private:
    struct Incidence {
        std::uint32_t triple_index;
        Role role;
    };
    std::vector<Triple> triples_;
    std::vector<std::vector<Incidence>> adjacency_;
};

/// Entity and relation tables shared across splits of one dataset.
struct Interners {
    SymbolTable entities;
    SymbolTable relations;
};

/// Reads benchmark-standard 3-column TSV (head \t relation \t tail, UTF-8).
/// Triples come back in file order; duplicate lines stay duplicated.
/// Malformed lines throw with a 1-based line number.
std::vector<Triple> load_triples(const std::string& path, Interners& interners);

/// Same, from an already-open text stream (`source` names it in errors).
std::vector<Triple> parse_triples(std::istream& in, Interners& interners,
                                  const std::string& source);

}  // namespace kglp

#include "kglp/graph.hpp"

#include <fstream>
#include <istream>
#include <stdexcept>

namespace kglp {

std::uint32_t SymbolTable::intern(std::string_view surface) {
    auto it = ids_.find(std::string(surface));
    if (it != ids_.end()) return it->second;
    auto id = static_cast<std::uint32_t>(names_.size());
    names_.emplace_back(surface);
    ids_.emplace(names_.back(), id);
    return id;
}

std::uint32_t SymbolTable::lookup(std::string_view surface) const {
    auto it = ids_.find(std::string(surface));
    return it == ids_.end() ? npos : it->second;
}

const std::string& SymbolTable::name(std::uint32_t id) const {
    if (id >= names_.size()) throw std::runtime_error("symbol id out of range");
    return names_[id];
}

KnowledgeGraph::KnowledgeGraph(std::vector<Triple> triples, std::size_t n_entities)
    : triples_(std::move(triples)), adjacency_(n_entities) {
    for (std::uint32_t i = 0; i < triples_.size(); ++i) {
        const Triple& t = triples_[i];
        if (t.head >= n_entities || t.tail >= n_entities)
            throw std::runtime_error("triple references entity outside the interned range");
        adjacency_[t.head].push_back({i, Role::Head});
        adjacency_[t.tail].push_back({i, Role::Tail});
    }
}

std::vector<OneHopTriple> KnowledgeGraph::one_hop(EntityId node) const {
    if (node >= adjacency_.size())
        throw std::runtime_error("one_hop: unknown entity id " + std::to_string(node));
    std::vector<OneHopTriple> out;
    out.reserve(adjacency_[node].size());
    for (const Incidence& inc : adjacency_[node])
        out.push_back({triples_[inc.triple_index], inc.triple_index, inc.role});
    return out;
}

std::size_t KnowledgeGraph::degree(EntityId node) const {
    if (node >= adjacency_.size())
        throw std::runtime_error("degree: unknown entity id " + std::to_string(node));
    return adjacency_[node].size();
}

std::vector<Triple> parse_triples(std::istream& in, Interners& interners,
                                  const std::string& source) {
    std::vector<Triple> triples;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto first = line.find('\t');
        auto second = first == std::string::npos ? std::string::npos
                                                 : line.find('\t', first + 1);
        auto third = second == std::string::npos ? std::string::npos
                                                 : line.find('\t', second + 1);
        if (first == std::string::npos || second == std::string::npos ||
            third != std::string::npos) {
            throw std::runtime_error(source + ":" + std::to_string(line_no) +
                                     ": expected 3 tab-separated fields");
        }
        Triple t;
        t.head = interners.entities.intern(std::string_view(line).substr(0, first));
        t.relation = interners.relations.intern(
            std::string_view(line).substr(first + 1, second - first - 1));
        t.tail = interners.entities.intern(std::string_view(line).substr(second + 1));
        triples.push_back(t);
    }
    return triples;
}

std::vector<Triple> load_triples(const std::string& path, Interners& interners) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open triples file: " + path);
    return parse_triples(in, interners, path);
}

}  // namespace kglp

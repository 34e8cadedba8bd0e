#pragma once

// Shared fixtures and independent oracles for the unit and acceptance suites.
// Everything here recomputes results by brute force, on purpose: these paths
// must stay independent of the implementation they check.

#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "kglp/graph.hpp"
#include "kglp/samples.hpp"

namespace kglp::testsupport {

using StringTriple = std::tuple<std::string, std::string, std::string>;

inline std::vector<Triple> intern_all(const std::vector<StringTriple>& rows,
                                      Interners& interners) {
    std::vector<Triple> out;
    for (const auto& [h, r, t] : rows) {
        Triple triple;
        triple.head = interners.entities.intern(h);
        triple.relation = interners.relations.intern(r);
        triple.tail = interners.entities.intern(t);
        out.push_back(triple);
    }
    return out;
}

/// Random triple list over e<N> entities and r<M> relations; may contain
/// duplicates and self-loops.
inline std::vector<StringTriple> random_triples(std::mt19937& rng, std::size_t max_triples,
                                                std::size_t n_entities = 10,
                                                std::size_t n_relations = 4) {
    std::uniform_int_distribution<std::size_t> n_dist(0, max_triples);
    std::uniform_int_distribution<std::size_t> e_dist(0, n_entities - 1);
    std::uniform_int_distribution<std::size_t> r_dist(0, n_relations - 1);
    std::vector<StringTriple> out;
    std::size_t n = n_dist(rng);
    for (std::size_t i = 0; i < n; ++i) {
        out.emplace_back("e" + std::to_string(e_dist(rng)), "r" + std::to_string(r_dist(rng)),
                         "e" + std::to_string(e_dist(rng)));
    }
    return out;
}

/// Brute-force pattern grouping: an independent scan with a dictionary,
/// mirroring the task definition directly on surface strings.
struct NaiveSample {
    std::string masked_side;
    std::string relation;
    std::string given;
    std::vector<std::string> labels;
};

inline std::vector<NaiveSample> naive_build_samples(const std::vector<StringTriple>& triples) {
    std::vector<NaiveSample> out;
    std::map<std::tuple<std::string, std::string, std::string>, std::size_t> slots;
    auto add = [&](const std::string& side, const std::string& rel, const std::string& given,
                   const std::string& label) {
        auto key = std::make_tuple(side, rel, given);
        auto it = slots.find(key);
        if (it == slots.end()) {
            it = slots.emplace(key, out.size()).first;
            out.push_back({side, rel, given, {}});
        }
        auto& labels = out[it->second].labels;
        for (const auto& existing : labels)
            if (existing == label) return;
        labels.push_back(label);
    };
    for (const auto& [h, r, t] : triples) {
        add("tail", r, h, t);
        add("head", r, t, h);
    }
    return out;
}

/// Naive per-entity degrees and disconnected count, straight from the
/// definitions.
struct NaiveStats {
    std::size_t n_nodes = 0;
    std::size_t n_relations = 0;
    std::size_t n_disconnected = 0;
    double avg_one_hop = 0.0;
};

inline NaiveStats naive_stats(const std::vector<StringTriple>& train,
                              const std::vector<StringTriple>& test) {
    NaiveStats s;
    std::set<std::string> entities, relations;
    for (const auto& split : {train, test}) {
        for (const auto& [h, r, t] : split) {
            entities.insert(h);
            entities.insert(t);
            relations.insert(r);
        }
    }
    s.n_nodes = entities.size();
    s.n_relations = relations.size();

    std::map<std::string, std::size_t> degree;
    for (const auto& [h, r, t] : train) {
        ++degree[h];
        ++degree[t];
    }
    for (const auto& [h, r, t] : train) {
        std::size_t self_h = (h == t) ? 2u : 1u;
        if (degree[h] == self_h && degree[t] == self_h) ++s.n_disconnected;
    }
    std::size_t total = 0;
    for (const auto& [e, d] : degree) total += d;
    s.avg_one_hop = entities.empty() ? 0.0
                                     : static_cast<double>(total) / static_cast<double>(s.n_nodes);
    return s;
}

inline std::string tsv(const std::vector<StringTriple>& rows) {
    std::ostringstream out;
    for (const auto& [h, r, t] : rows) out << h << '\t' << r << '\t' << t << '\n';
    return out.str();
}

}  // namespace kglp::testsupport

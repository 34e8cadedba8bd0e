#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>

#include "kglp/graph.hpp"
#include "kglp/samples.hpp"

namespace kglp {

/// Dataset characterization in the shape of the usual benchmark tables.
/// Counts are always computed from the input files, never hardcoded.
struct GraphStats {
    std::size_t n_nodes = 0;      // distinct entities over train + test
    std::size_t n_relations = 0;  // distinct relations over train + test
    std::size_t n_train_triples = 0;
    std::size_t n_test_triples = 0;
    std::size_t n_disconnected = 0;  // train triples isolated from the rest
    double avg_one_hop = 0.0;        // train degree sum / n_nodes
    std::size_t n_train_samples = 0;
    std::size_t n_test_samples = 0;
    std::size_t n_labels = 0;          // distinct label entities, train samples
    double avg_labels_per_sample = 0;  // over train samples
    double avg_samples_per_label = 0;  // total train labels / n_labels
};

/// A train triple is disconnected when removing it leaves both endpoints
/// with degree 0, i.e. neither endpoint has any other incident edge.
/// Averages are single divisions of exact integer tallies; empty inputs
/// yield 0 everywhere.
GraphStats compute_stats(std::span<const Triple> train, std::span<const Triple> test,
                         const SampleSet& train_samples, const SampleSet& test_samples);

/// key: value per line, fixed order, suitable for the `stats` report.
void write_stats_text(std::ostream& out, const GraphStats& stats);

/// Same fields as a JSON object.
std::string stats_to_json(const GraphStats& stats);

}  // namespace kglp

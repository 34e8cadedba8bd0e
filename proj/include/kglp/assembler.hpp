#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kglp/graph.hpp"
#include "kglp/samples.hpp"
#include "kglp/similarity.hpp"
#include "kglp/textstore.hpp"

namespace kglp {

enum class FilterStrategy : std::uint8_t {
    Packed,  // as many neighbors as fit in the token budget, no descriptions
    TopK,    // top-k neighbors with endpoint descriptions, no budget cut
};

const char* to_string(FilterStrategy strategy);
FilterStrategy strategy_from_string(std::string_view s);

/// A one-hop triple with its fully rendered text and similarity score.
struct ScoredNeighbor {
    OneHopTriple one_hop;
    std::string rendered;       // head || D_head || rel || tail || D_tail
    double score = 0.0;
    std::uint32_t source_rank;  // insertion index, the tie-breaker
};

/// The final raw-text input for one sample.
struct AssembledInput {
    std::string text;
    std::size_t token_count = 0;
    IncompletePattern pattern;
    FilterStrategy strategy = FilterStrategy::Packed;
    std::size_t neighbors_used = 0;
};

struct AssemblerConfig {
    FilterStrategy strategy = FilterStrategy::Packed;
    std::size_t k_top = 3;
    std::size_t max_input_tokens = 512;
    bool exclude_answer_edges = true;
    bool use_descriptions = true;   // drop d and D entirely when false
    bool include_one_hop = true;    // drop filtered_1-hop entirely when false
};

/// "[MASK] r t" or "h r [MASK]"; empty surface forms are skipped when joining.
std::string make_input_triple(const IncompletePattern& pattern, const Interners& interners);

/// "[MASK] r t d_t" or "h d_h r [MASK]". Only the given (unmasked) side ever
/// carries its description; a missing description leaves no empty slot.
std::string make_triple_with_d(const IncompletePattern& pattern, const Interners& interners,
                               const DescriptionStore& store);

/// Renders a one-hop triple in its own head->tail orientation with each
/// entity immediately followed by its description when present.
/// Throws when `given` is not an endpoint of the neighbor triple.
std::string make_one_hop_with_D(const OneHopTriple& neighbor, EntityId given,
                                const Interners& interners, const DescriptionStore& store);

/// Scores each neighbor's rendered text against the anchor and sorts by
/// descending score, ties broken by ascending source_rank. A non-finite
/// score is a provider failure and throws, identifying the neighbor.
std::vector<ScoredNeighbor> score_neighbors(const std::string& anchor,
                                            std::vector<ScoredNeighbor> neighbors,
                                            const SimilarityProvider& provider);

/// Greedy budget packing: appends neighbors in sorted order, rendered without
/// descriptions, " [SEP] "-joined, stopping before the first neighbor whose
/// inclusion would push the final assembled input past the budget. The scan
/// terminates at the first overflow (prefix rule). neighbors_used_out reports
/// how many made it in.
std::string filter_packed(const std::vector<ScoredNeighbor>& sorted,
                          const IncompletePattern& pattern, const Interners& interners,
                          const DescriptionStore& store, const Tokenizer& tokenizer,
                          std::size_t max_input_tokens, std::size_t& neighbors_used_out);

/// Takes min(k, n) neighbors in sorted order, each with both endpoint
/// descriptions (the rendered form), " [SEP] "-joined. No budget truncation.
std::string filter_top_k(const std::vector<ScoredNeighbor>& sorted, std::size_t k,
                         std::size_t& neighbors_used_out);

/// "[CLS] " + triple_with_d, then " [SEP] " + filtered when nonempty.
AssembledInput assemble(const IncompletePattern& pattern, const Interners& interners,
                        const DescriptionStore& store, const Tokenizer& tokenizer,
                        const std::string& filtered, FilterStrategy strategy,
                        std::size_t neighbors_used);

/// Full stage 1-4 pipeline for one sample: neighborhood of the given node,
/// answer-edge exclusion, scoring, the configured filter, final assembly.
AssembledInput assemble_sample(const IncompletePattern& pattern, const KnowledgeGraph& graph,
                               const Interners& interners, const DescriptionStore& store,
                               const Tokenizer& tokenizer, const SimilarityProvider& provider,
                               const AssemblerConfig& config);

/// Per-sample assembly over a whole set, optionally fanned out over worker
/// threads. Output order always matches sample order.
std::vector<AssembledInput> assemble_dataset(const SampleSet& samples,
                                             const KnowledgeGraph& graph,
                                             const Interners& interners,
                                             const DescriptionStore& store,
                                             const Tokenizer& tokenizer,
                                             const SimilarityProvider& provider,
                                             const AssemblerConfig& config,
                                             std::size_t workers = 1);

}  // namespace kglp

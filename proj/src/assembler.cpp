#include "kglp/assembler.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace kglp {

namespace {

constexpr const char* kCls = "[CLS]";
constexpr const char* kSep = "[SEP]";
constexpr const char* kMask = "[MASK]";

void append_part(std::string& out, std::string_view part) {
    if (part.empty()) return;
    if (!out.empty()) out += ' ';
    out += part;
}

/// head || d(head) || rel || tail || d(tail), empty parts skipped.
std::string render_triple(const Triple& t, const Interners& interners,
                          const DescriptionStore* store) {
    std::string out;
    append_part(out, interners.entities.name(t.head));
    if (store) append_part(out, store->get(t.head));
    append_part(out, interners.relations.name(t.relation));
    append_part(out, interners.entities.name(t.tail));
    if (store) append_part(out, store->get(t.tail));
    return out;
}

bool matches_pattern(const Triple& t, const IncompletePattern& pattern) {
    if (t.relation != pattern.relation) return false;
    return pattern.masked_side == MaskedSide::Tail ? t.head == pattern.given
                                                   : t.tail == pattern.given;
}

}  // namespace

const char* to_string(FilterStrategy strategy) {
    return strategy == FilterStrategy::Packed ? "packed" : "top_k";
}

FilterStrategy strategy_from_string(std::string_view s) {
    if (s == "packed") return FilterStrategy::Packed;
    if (s == "top_k") return FilterStrategy::TopK;
    throw std::runtime_error("unknown strategy: " + std::string(s));
}

std::string make_input_triple(const IncompletePattern& pattern, const Interners& interners) {
    std::string out;
    const std::string& given = interners.entities.name(pattern.given);
    const std::string& relation = interners.relations.name(pattern.relation);
    if (pattern.masked_side == MaskedSide::Head) {
        append_part(out, kMask);
        append_part(out, relation);
        append_part(out, given);
    } else {
        append_part(out, given);
        append_part(out, relation);
        append_part(out, kMask);
    }
    return out;
}

std::string make_triple_with_d(const IncompletePattern& pattern, const Interners& interners,
                               const DescriptionStore& store) {
    std::string out;
    const std::string& given = interners.entities.name(pattern.given);
    const std::string& relation = interners.relations.name(pattern.relation);
    const std::string& description = store.get(pattern.given);
    if (pattern.masked_side == MaskedSide::Head) {
        append_part(out, kMask);
        append_part(out, relation);
        append_part(out, given);
        append_part(out, description);
    } else {
        append_part(out, given);
        append_part(out, description);
        append_part(out, relation);
        append_part(out, kMask);
    }
    return out;
}

std::string make_one_hop_with_D(const OneHopTriple& neighbor, EntityId given,
                                const Interners& interners, const DescriptionStore& store) {
    if (neighbor.triple.head != given && neighbor.triple.tail != given)
        throw std::runtime_error("make_one_hop_with_D: given entity is not an endpoint");
    return render_triple(neighbor.triple, interners, &store);
}

std::vector<ScoredNeighbor> score_neighbors(const std::string& anchor,
                                            std::vector<ScoredNeighbor> neighbors,
                                            const SimilarityProvider& provider) {
    for (ScoredNeighbor& n : neighbors) {
        double s = provider.score(anchor, n.rendered);
        if (!std::isfinite(s))
            throw std::runtime_error("similarity provider returned non-finite score for: " +
                                     n.rendered);
        n.score = s;
    }
    std::stable_sort(neighbors.begin(), neighbors.end(),
                     [](const ScoredNeighbor& a, const ScoredNeighbor& b) {
                         if (a.score != b.score) return a.score > b.score;
                         return a.source_rank < b.source_rank;
                     });
    return neighbors;
}

std::string filter_packed(const std::vector<ScoredNeighbor>& sorted,
                          const IncompletePattern& pattern, const Interners& interners,
                          const DescriptionStore& store, const Tokenizer& tokenizer,
                          std::size_t max_input_tokens, std::size_t& neighbors_used_out) {
    neighbors_used_out = 0;
    std::string base = make_triple_with_d(pattern, interners, store);
    std::string bare;
    append_part(bare, kCls);
    append_part(bare, base);
    if (count_tokens(bare, tokenizer) > max_input_tokens)
        throw std::runtime_error("filter_packed: budget smaller than the neighbor-free input (" +
                                 std::to_string(count_tokens(bare, tokenizer)) + " > " +
                                 std::to_string(max_input_tokens) + " tokens)");

    std::string filtered;
    for (const ScoredNeighbor& n : sorted) {
        std::string rendered = render_triple(n.one_hop.triple, interners, nullptr);
        std::string candidate =
            filtered.empty() ? rendered : filtered + " " + kSep + " " + rendered;
        std::string final_text =
            candidate.empty() ? bare : bare + " " + kSep + " " + candidate;
        if (count_tokens(final_text, tokenizer) > max_input_tokens) break;  // prefix rule
        filtered = std::move(candidate);
        ++neighbors_used_out;
    }
    return filtered;
}

std::string filter_top_k(const std::vector<ScoredNeighbor>& sorted, std::size_t k,
                         std::size_t& neighbors_used_out) {
    std::string out;
    std::size_t take = std::min(k, sorted.size());
    for (std::size_t i = 0; i < take; ++i) {
        if (!out.empty()) out += std::string(" ") + kSep + " ";
        out += sorted[i].rendered;
    }
    neighbors_used_out = take;
    return out;
}

AssembledInput assemble(const IncompletePattern& pattern, const Interners& interners,
                        const DescriptionStore& store, const Tokenizer& tokenizer,
                        const std::string& filtered, FilterStrategy strategy,
                        std::size_t neighbors_used) {
    AssembledInput input;
    input.pattern = pattern;
    input.strategy = strategy;
    input.neighbors_used = neighbors_used;
    std::string text;
    append_part(text, kCls);
    append_part(text, make_triple_with_d(pattern, interners, store));
    if (!filtered.empty()) text += std::string(" ") + kSep + " " + filtered;
    input.token_count = count_tokens(text, tokenizer);
    input.text = std::move(text);
    return input;
}

AssembledInput assemble_sample(const IncompletePattern& pattern, const KnowledgeGraph& graph,
                               const Interners& interners, const DescriptionStore& store,
                               const Tokenizer& tokenizer, const SimilarityProvider& provider,
                               const AssemblerConfig& config) {
    static const DescriptionStore kNoDescriptions;
    const DescriptionStore& descriptions = config.use_descriptions ? store : kNoDescriptions;

    std::string filtered;
    std::size_t used = 0;
    if (config.include_one_hop && pattern.given < graph.n_entities()) {
        std::vector<ScoredNeighbor> candidates;
        std::uint32_t rank = 0;
        for (const OneHopTriple& hop : graph.one_hop(pattern.given)) {
            if (config.exclude_answer_edges && matches_pattern(hop.triple, pattern)) continue;
            ScoredNeighbor n;
            n.one_hop = hop;
            n.rendered = make_one_hop_with_D(hop, pattern.given, interners, descriptions);
            n.source_rank = rank++;
            candidates.push_back(std::move(n));
        }
        std::string anchor = make_triple_with_d(pattern, interners, descriptions);
        auto sorted = score_neighbors(anchor, std::move(candidates), provider);
        if (config.strategy == FilterStrategy::Packed) {
            filtered = filter_packed(sorted, pattern, interners, descriptions, tokenizer,
                                     config.max_input_tokens, used);
        } else {
            filtered = filter_top_k(sorted, config.k_top, used);
        }
    }
    return assemble(pattern, interners, descriptions, tokenizer, filtered, config.strategy, used);
}

std::vector<AssembledInput> assemble_dataset(const SampleSet& samples,
                                             const KnowledgeGraph& graph,
                                             const Interners& interners,
                                             const DescriptionStore& store,
                                             const Tokenizer& tokenizer,
                                             const SimilarityProvider& provider,
                                             const AssemblerConfig& config,
                                             std::size_t workers) {
    std::vector<AssembledInput> out(samples.samples.size());
    if (!provider.concurrent_safe()) workers = 1;
    workers = std::max<std::size_t>(1, std::min(workers, samples.samples.size()));

    auto run = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            out[i] = assemble_sample(samples.samples[i].pattern, graph, interners, store,
                                     tokenizer, provider, config);
    };

    if (workers <= 1) {
        run(0, samples.samples.size());
        return out;
    }
    std::vector<std::thread> pool;
    std::mutex error_mutex;
    std::exception_ptr first_error;
    std::size_t chunk = (samples.samples.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        std::size_t begin = w * chunk;
        std::size_t end = std::min(begin + chunk, samples.samples.size());
        if (begin >= end) break;
        pool.emplace_back([&, begin, end] {
            try {
                run(begin, end);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

}  // namespace kglp

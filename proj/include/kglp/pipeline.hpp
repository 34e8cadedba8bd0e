#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "kglp/assembler.hpp"
#include "kglp/checkpoint.hpp"
#include "kglp/metrics.hpp"
#include "kglp/stats.hpp"
#include "kglp/trainer.hpp"

namespace kglp {

/// FNV-1a 64-bit, hex-encoded; the config fingerprint every artifact embeds.
std::uint64_t fnv1a64(std::string_view text);
std::string fingerprint_hex(std::string_view text);

/// Fully resolved run configuration. Every key has a default; unknown keys
/// are rejected at parse time.
struct RunConfig {
    // paths
    std::string train_triples;
    std::string test_triples;
    std::string descriptions;
    std::string vectors_file;
    std::string out_dir = "out";

    // assembly
    std::string strategy = "packed";  // packed | top_k
    std::size_t k_top = 3;
    std::size_t max_input_tokens = 512;
    std::string provider = "ngram";  // ngram | vectors | constant
    bool exclude_answer_edges = true;
    bool use_descriptions = true;
    bool include_one_hop = true;
    bool shorten = false;  // apply the semicolon rule to loaded descriptions
    std::size_t workers = 1;

    // trainer
    std::size_t b = 768;  // embedding dimension
    std::size_t d_model = 768;
    std::size_t warmup = 12000;
    double alpha1 = 30000, alpha2 = 100, alpha3 = 2;
    bool precision1 = false, precision2 = true, precision3 = true;
    std::size_t epochs1 = 31, epochs2 = 9, epochs3 = 5;
    std::size_t batch_size = 160;
    double threshold = 0.5;
    double holdout_fraction = 0.1;
    std::size_t accumulation = 1;
    std::uint64_t seed = 1;
    std::string gate_mode = "epochs";  // epochs | recall
    bool reset_schedule_per_stage = false;

    void set(const std::string& key, const std::string& value);

    /// Range checks beyond per-key parsing (positive alphas, threshold in
    /// (0,1), holdout_fraction in [0,1), nonzero sizes). Throws on the first
    /// violation.
    void validate() const;

    /// Stable key=value serialization, fixed key order.
    std::string resolved() const;

    /// Hash of the resolved text minus out_dir, so relocating a run's output
    /// does not change its identity.
    std::string fingerprint() const;

    std::vector<StageConfig> stages() const;
    TrainConfig train_config() const;
    AssemblerConfig assembler_config() const;
    std::unique_ptr<SimilarityProvider> make_provider() const;
};

/// key=value lines, '#' comments; later overrides win.
RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(std::istream& in, const std::string& source);

/// One assembled input as serialized to JSONL (surface forms throughout).
struct AssembledRow {
    std::string text;
    std::size_t token_count = 0;
    std::string masked_side;
    std::string relation;
    std::string given;
    std::vector<std::string> labels;
};

/// "kglp/<kind>@1" metadata line carrying the fingerprint; readers skip it.
void write_jsonl_header(std::ostream& out, const std::string& kind,
                        const std::string& fingerprint);

void write_assembled_jsonl(std::ostream& out, std::span<const AssembledInput> inputs,
                           const SampleSet& samples, const Interners& interners);

struct AssembledFile {
    std::vector<AssembledRow> rows;
    std::string fingerprint;  // empty when the file had no metadata line
};
AssembledFile read_assembled_jsonl(std::istream& in, const std::string& source);
AssembledFile load_assembled_jsonl(const std::string& path);

/// Token vocabulary over the train rows' texts, in text order.
TokenVocab build_vocab(std::span<const AssembledRow> rows, const Tokenizer& tokenizer);

struct EncodedRows {
    std::vector<EncodedSample> samples;
    std::size_t dropped_labels = 0;  // test-mode labels outside the space
};
EncodedRows encode_rows(std::span<const AssembledRow> rows, const TokenVocab& vocab,
                        const Tokenizer& tokenizer, const LabelSpace& labels, LabelMode mode);

struct PipelineResult {
    GraphStats stats;
    EvalReport eval;
    StageLog log;
    std::string fingerprint;
    std::vector<std::string> artifacts;  // paths written, in creation order
};

/// stats -> build-samples -> assemble -> train -> eval, all artifacts under
/// config.out_dir. Stage failures are rethrown tagged with the stage name.
PipelineResult run_pipeline(const RunConfig& config, std::ostream* progress = nullptr);

}  // namespace kglp

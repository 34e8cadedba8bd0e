#include "kglp/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "kglp/stats.hpp"

namespace kglp {

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string fingerprint_hex(std::string_view text) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(text)));
    return buf;
}

namespace {

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "on") return true;
    if (value == "false" || value == "0" || value == "off") return false;
    throw std::runtime_error("config key '" + key + "': expected a boolean, got '" + value + "'");
}

std::size_t parse_size(const std::string& key, const std::string& value) {
    try {
        // stoull silently wraps negative input, so reject it up front
        if (!value.empty() && value[0] == '-') throw std::invalid_argument(value);
        std::size_t pos = 0;
        auto v = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("config key '" + key + "': expected a nonnegative integer, got '" +
                                 value + "'");
    }
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("config key '" + key + "': expected a number, got '" + value +
                                 "'");
    }
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
    if (key == "train_triples") train_triples = value;
    else if (key == "test_triples") test_triples = value;
    else if (key == "descriptions") descriptions = value;
    else if (key == "vectors_file") vectors_file = value;
    else if (key == "out_dir") out_dir = value;
    else if (key == "strategy") {
        strategy_from_string(value);  // validate
        strategy = value;
    }
    else if (key == "k_top") k_top = parse_size(key, value);
    else if (key == "max_input_tokens") max_input_tokens = parse_size(key, value);
    else if (key == "provider") {
        if (value != "ngram" && value != "vectors" && value != "constant")
            throw std::runtime_error("config key 'provider': expected ngram|vectors|constant");
        provider = value;
    }
    else if (key == "exclude_answer_edges") exclude_answer_edges = parse_bool(key, value);
    else if (key == "use_descriptions") use_descriptions = parse_bool(key, value);
    else if (key == "include_one_hop") include_one_hop = parse_bool(key, value);
    else if (key == "shorten") shorten = parse_bool(key, value);
    else if (key == "workers") workers = parse_size(key, value);
    else if (key == "b") b = parse_size(key, value);
    else if (key == "d_model") d_model = parse_size(key, value);
    else if (key == "warmup") warmup = parse_size(key, value);
    else if (key == "alpha1") alpha1 = parse_double(key, value);
    else if (key == "alpha2") alpha2 = parse_double(key, value);
    else if (key == "alpha3") alpha3 = parse_double(key, value);
    else if (key == "precision1") precision1 = parse_bool(key, value);
    else if (key == "precision2") precision2 = parse_bool(key, value);
    else if (key == "precision3") precision3 = parse_bool(key, value);
    else if (key == "epochs1") epochs1 = parse_size(key, value);
    else if (key == "epochs2") epochs2 = parse_size(key, value);
    else if (key == "epochs3") epochs3 = parse_size(key, value);
    else if (key == "batch_size") batch_size = parse_size(key, value);
    else if (key == "threshold") threshold = parse_double(key, value);
    else if (key == "holdout_fraction") holdout_fraction = parse_double(key, value);
    else if (key == "accumulation") accumulation = parse_size(key, value);
    else if (key == "seed") seed = parse_size(key, value);
    else if (key == "gate_mode") {
        gate_mode_from_string(value);  // validate
        gate_mode = value;
    }
    else if (key == "reset_schedule_per_stage") reset_schedule_per_stage = parse_bool(key, value);
    else throw std::runtime_error("unknown config key: '" + key + "'");
}

void RunConfig::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw std::runtime_error(std::string("invalid config: ") + what);
    };
    require(k_top >= 1, "k_top must be >= 1");
    require(batch_size >= 1, "batch_size must be >= 1");
    require(b >= 1, "b must be >= 1");
    require(d_model >= 1, "d_model must be >= 1");
    require(warmup >= 1, "warmup must be >= 1");
    require(alpha1 > 0 && alpha2 > 0 && alpha3 > 0, "alphas must be positive");
    require(threshold > 0.0 && threshold < 1.0, "threshold must be in (0, 1)");
    require(holdout_fraction >= 0.0 && holdout_fraction < 1.0,
            "holdout_fraction must be in [0, 1)");
}

std::string RunConfig::resolved() const {
    std::ostringstream out;
    out << "train_triples=" << train_triples << '\n'
        << "test_triples=" << test_triples << '\n'
        << "descriptions=" << descriptions << '\n'
        << "vectors_file=" << vectors_file << '\n'
        << "out_dir=" << out_dir << '\n'
        << "strategy=" << strategy << '\n'
        << "k_top=" << k_top << '\n'
        << "max_input_tokens=" << max_input_tokens << '\n'
        << "provider=" << provider << '\n'
        << "exclude_answer_edges=" << (exclude_answer_edges ? "true" : "false") << '\n'
        << "use_descriptions=" << (use_descriptions ? "true" : "false") << '\n'
        << "include_one_hop=" << (include_one_hop ? "true" : "false") << '\n'
        << "shorten=" << (shorten ? "true" : "false") << '\n'
        << "workers=" << workers << '\n'
        << "b=" << b << '\n'
        << "d_model=" << d_model << '\n'
        << "warmup=" << warmup << '\n'
        << "alpha1=" << format_double(alpha1) << '\n'
        << "alpha2=" << format_double(alpha2) << '\n'
        << "alpha3=" << format_double(alpha3) << '\n'
        << "precision1=" << (precision1 ? "true" : "false") << '\n'
        << "precision2=" << (precision2 ? "true" : "false") << '\n'
        << "precision3=" << (precision3 ? "true" : "false") << '\n'
        << "epochs1=" << epochs1 << '\n'
        << "epochs2=" << epochs2 << '\n'
        << "epochs3=" << epochs3 << '\n'
        << "batch_size=" << batch_size << '\n'
        << "threshold=" << format_double(threshold) << '\n'
        << "holdout_fraction=" << format_double(holdout_fraction) << '\n'
        << "accumulation=" << accumulation << '\n'
        << "seed=" << seed << '\n'
        << "gate_mode=" << gate_mode << '\n'
        << "reset_schedule_per_stage=" << (reset_schedule_per_stage ? "true" : "false") << '\n';
    return out.str();
}

std::string RunConfig::fingerprint() const {
    std::istringstream in(resolved());
    std::ostringstream keep;
    std::string line;
    while (std::getline(in, line))
        if (line.rfind("out_dir=", 0) != 0) keep << line << '\n';
    return fingerprint_hex(keep.str());
}

std::vector<StageConfig> RunConfig::stages() const {
    StageConfig s1{alpha1, precision1, epochs1, batch_size, threshold};
    StageConfig s2{alpha2, precision2, epochs2, batch_size, threshold};
    StageConfig s3{alpha3, precision3, epochs3, batch_size, threshold};
    return {s1, s2, s3};
}

TrainConfig RunConfig::train_config() const {
    TrainConfig tc;
    tc.stages = stages();
    tc.schedule = {d_model, warmup};
    tc.seed = seed;
    tc.holdout_fraction = holdout_fraction;
    tc.accumulation = std::max<std::size_t>(1, accumulation);
    tc.gate_mode = gate_mode_from_string(gate_mode);
    tc.reset_schedule_per_stage = reset_schedule_per_stage;
    return tc;
}

AssemblerConfig RunConfig::assembler_config() const {
    AssemblerConfig ac;
    ac.strategy = strategy_from_string(strategy);
    ac.k_top = k_top;
    ac.max_input_tokens = max_input_tokens;
    ac.exclude_answer_edges = exclude_answer_edges;
    ac.use_descriptions = use_descriptions;
    ac.include_one_hop = include_one_hop;
    return ac;
}

std::unique_ptr<SimilarityProvider> RunConfig::make_provider() const {
    if (provider == "ngram") return std::make_unique<NgramCosineProvider>();
    if (provider == "constant") return std::make_unique<ConstantProvider>();
    if (provider == "vectors") {
        if (vectors_file.empty())
            throw std::runtime_error("provider=vectors requires vectors_file");
        return std::make_unique<PrecomputedVectorProvider>(
            PrecomputedVectorProvider::load(vectors_file));
    }
    throw std::runtime_error("unknown provider: " + provider);
}

RunConfig parse_run_config(std::istream& in, const std::string& source) {
    RunConfig config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t");
            auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string trimmed = trim(line);
        if (trimmed.empty()) continue;
        auto eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(source + ":" + std::to_string(line_no) +
                                     ": expected key=value");
        try {
            config.set(trim(trimmed.substr(0, eq)), trim(trimmed.substr(eq + 1)));
        } catch (const std::exception& e) {
            throw std::runtime_error(source + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return config;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    return parse_run_config(in, path);
}

void write_jsonl_header(std::ostream& out, const std::string& kind,
                        const std::string& fingerprint) {
    nlohmann::json j{{"format", "kglp/" + kind + "@1"}, {"fingerprint", fingerprint}};
    out << j.dump() << '\n';
}

void write_assembled_jsonl(std::ostream& out, std::span<const AssembledInput> inputs,
                           const SampleSet& samples, const Interners& interners) {
    if (inputs.size() != samples.samples.size())
        throw std::runtime_error("write_assembled_jsonl: inputs do not match samples");
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const AssembledInput& a = inputs[i];
        const MultiLabelSample& s = samples.samples[i];
        nlohmann::json row;
        row["text"] = a.text;
        row["token_count"] = a.token_count;
        row["masked_side"] = to_string(s.pattern.masked_side);
        row["relation"] = interners.relations.name(s.pattern.relation);
        row["given"] = interners.entities.name(s.pattern.given);
        nlohmann::json labels = nlohmann::json::array();
        for (EntityId e : s.labels) labels.push_back(interners.entities.name(e));
        row["labels"] = std::move(labels);
        out << row.dump() << '\n';
    }
}

AssembledFile read_assembled_jsonl(std::istream& in, const std::string& source) {
    AssembledFile file;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json row;
        try {
            row = nlohmann::json::parse(line);
            if (line_no == 1 && row.contains("format")) {
                file.fingerprint = row.value("fingerprint", "");
                continue;
            }
            AssembledRow r;
            r.text = row.at("text").get<std::string>();
            r.token_count = row.at("token_count").get<std::size_t>();
            r.masked_side = row.at("masked_side").get<std::string>();
            r.relation = row.at("relation").get<std::string>();
            r.given = row.at("given").get<std::string>();
            for (const auto& label : row.at("labels"))
                r.labels.push_back(label.get<std::string>());
            file.rows.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error(source + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return file;
}

AssembledFile load_assembled_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open assembled file: " + path);
    return read_assembled_jsonl(in, path);
}

TokenVocab build_vocab(std::span<const AssembledRow> rows, const Tokenizer& tokenizer) {
    TokenVocab vocab;
    for (const AssembledRow& row : rows)
        for (const std::string& token : tokenizer.tokenize(row.text)) vocab.add(token);
    return vocab;
}

EncodedRows encode_rows(std::span<const AssembledRow> rows, const TokenVocab& vocab,
                        const Tokenizer& tokenizer, const LabelSpace& labels, LabelMode mode) {
    EncodedRows out;
    out.samples.reserve(rows.size());
    for (const AssembledRow& row : rows) {
        EncodedSample sample;
        for (const std::string& token : tokenizer.tokenize(row.text))
            sample.token_ids.push_back(vocab.id(token));
        for (const std::string& label : row.labels) {
            std::uint32_t col = labels.column(label);
            if (col == LabelSpace::npos) {
                if (mode == LabelMode::Train)
                    throw std::runtime_error("label entity not in training index: " + label);
                ++out.dropped_labels;
                continue;
            }
            sample.positive_columns.push_back(col);
        }
        std::sort(sample.positive_columns.begin(), sample.positive_columns.end());
        sample.positive_columns.erase(
            std::unique(sample.positive_columns.begin(), sample.positive_columns.end()),
            sample.positive_columns.end());
        out.samples.push_back(std::move(sample));
    }
    return out;
}

namespace {

template <typename Fn>
auto stage(const char* name, std::ostream* progress, Fn&& fn) {
    if (progress) *progress << "[pipeline] " << name << "...\n";
    try {
        return fn();
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string(name) + ": " + e.what());
    }
}

}  // namespace

PipelineResult run_pipeline(const RunConfig& config, std::ostream* progress) {
    namespace fs = std::filesystem;
    config.validate();
    PipelineResult result;
    result.fingerprint = config.fingerprint();
    const fs::path out_dir(config.out_dir);
    fs::create_directories(out_dir);

    auto open_artifact = [&](const std::string& name, std::ofstream& out) {
        fs::path p = out_dir / name;
        out.open(p, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write artifact: " + p.string());
        result.artifacts.push_back(p.string());
    };

    // Inputs.
    Interners interners;
    std::vector<Triple> train_split, test_split;
    DescriptionStore store;
    stage("load", progress, [&] {
        if (config.train_triples.empty())
            throw std::runtime_error("train_triples is required");
        train_split = load_triples(config.train_triples, interners);
        if (!config.test_triples.empty()) test_split = load_triples(config.test_triples, interners);
        if (!config.descriptions.empty()) {
            store = load_descriptions(config.descriptions, interners);
            if (config.shorten) store = shorten_all(store);
        } else if (progress) {
            *progress << "[pipeline] warning: no descriptions file; running with an empty store\n";
        }
        return 0;
    });

    // Samples.
    SampleSet train_samples, test_samples;
    stage("build-samples", progress, [&] {
        train_samples = build_samples(train_split);
        test_samples = build_samples(test_split);
        std::ofstream out;
        open_artifact("samples_train.jsonl", out);
        write_jsonl_header(out, "samples", result.fingerprint);
        write_samples_jsonl(out, train_samples, interners);
        std::ofstream out_test;
        open_artifact("samples_test.jsonl", out_test);
        write_jsonl_header(out_test, "samples", result.fingerprint);
        write_samples_jsonl(out_test, test_samples, interners);
        return 0;
    });

    // Stats.
    stage("stats", progress, [&] {
        result.stats = compute_stats(train_split, test_split, train_samples, test_samples);
        std::ofstream out;
        open_artifact("stats.txt", out);
        out << "fingerprint: " << result.fingerprint << '\n';
        write_stats_text(out, result.stats);
        std::ofstream json_out;
        open_artifact("stats.json", json_out);
        nlohmann::json j = nlohmann::json::parse(stats_to_json(result.stats));
        j["fingerprint"] = result.fingerprint;
        json_out << j.dump(2) << '\n';
        return 0;
    });

    // Assembly.
    WhitespaceTokenizer tokenizer;
    tokenizer.add_entity_atoms(interners.entities);
    auto provider = config.make_provider();
    std::vector<AssembledInput> assembled_train, assembled_test;
    stage("assemble", progress, [&] {
        KnowledgeGraph graph(train_split, interners.entities.size());
        AssemblerConfig ac = config.assembler_config();
        assembled_train = assemble_dataset(train_samples, graph, interners, store, tokenizer,
                                           *provider, ac, config.workers);
        // Known train edges cannot leak a held-out answer; keep them as context.
        AssemblerConfig test_ac = ac;
        test_ac.exclude_answer_edges = false;
        assembled_test = assemble_dataset(test_samples, graph, interners, store, tokenizer,
                                          *provider, test_ac, config.workers);
        std::ofstream out;
        open_artifact("assembled_train.jsonl", out);
        write_jsonl_header(out, "assembled", result.fingerprint);
        write_assembled_jsonl(out, assembled_train, train_samples, interners);
        std::ofstream out_test;
        open_artifact("assembled_test.jsonl", out_test);
        write_jsonl_header(out_test, "assembled", result.fingerprint);
        write_assembled_jsonl(out_test, assembled_test, test_samples, interners);
        return 0;
    });

    // Label space from the training entities.
    LabelSpace labels;
    stage("entity-index", progress, [&] {
        EntityIndex index = EntityIndex::from_triples(train_split);
        for (EntityId e : index.entities()) labels.add(interners.entities.name(e));
        std::ofstream out;
        open_artifact("entity_index.txt", out);
        write_label_space(out, labels);
        return 0;
    });

    // Training.
    Checkpoint ckpt;
    stage("train", progress, [&] {
        AssembledFile train_file;
        for (std::size_t i = 0; i < assembled_train.size(); ++i) {
            AssembledRow row;
            row.text = assembled_train[i].text;
            row.token_count = assembled_train[i].token_count;
            for (EntityId e : train_samples.samples[i].labels)
                row.labels.push_back(interners.entities.name(e));
            train_file.rows.push_back(std::move(row));
        }
        TokenVocab vocab = build_vocab(train_file.rows, tokenizer);
        EncodedRows encoded =
            encode_rows(train_file.rows, vocab, tokenizer, labels, LabelMode::Train);
        ModelParams params =
            ModelParams::init(vocab.size(), config.b, labels.size(), config.seed);
        TrainResult tr = train(std::move(params), std::move(encoded.samples),
                               config.train_config());
        ckpt.params = std::move(tr.params);
        ckpt.vocab = std::move(vocab);
        ckpt.labels = labels;
        ckpt.fingerprint = result.fingerprint;
        result.log = std::move(tr.log);
        std::ofstream log_out;
        open_artifact("stage_log.jsonl", log_out);
        write_jsonl_header(log_out, "stage-log", result.fingerprint);
        result.log.write_jsonl(log_out);
        std::ofstream ckpt_out;
        open_artifact("checkpoint.txt", ckpt_out);
        save_checkpoint(ckpt_out, ckpt);
        return 0;
    });

    // Evaluation: test split when present, otherwise the training inputs.
    stage("eval", progress, [&] {
        const std::vector<AssembledInput>& inputs =
            test_split.empty() ? assembled_train : assembled_test;
        const SampleSet& sample_set = test_split.empty() ? train_samples : test_samples;
        std::vector<AssembledRow> rows;
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            AssembledRow row;
            row.text = inputs[i].text;
            for (EntityId e : sample_set.samples[i].labels)
                row.labels.push_back(interners.entities.name(e));
            rows.push_back(std::move(row));
        }
        EncodedRows encoded =
            encode_rows(rows, ckpt.vocab, tokenizer, ckpt.labels, LabelMode::Test);
        const std::size_t ks[] = {1, 3, 5};
        std::span<const std::size_t> use_ks(ks, ckpt.labels.size() >= 5 ? 3
                                                : ckpt.labels.size() >= 3 ? 2
                                                                          : 1);
        result.eval = evaluate(ckpt.params, encoded.samples, use_ks, config.threshold);
        result.eval.fingerprint = result.fingerprint;
        std::ofstream out;
        open_artifact("eval.json", out);
        out << result.eval.to_json() << '\n';
        std::ofstream table_out;
        open_artifact("eval.txt", table_out);
        table_out << result.eval.to_table();
        return 0;
    });

    std::ofstream cfg_out;
    open_artifact("resolved_config.txt", cfg_out);
    cfg_out << "# fingerprint: " << result.fingerprint << '\n' << config.resolved();
    return result;
}

}  // namespace kglp

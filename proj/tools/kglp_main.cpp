#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kglp/pipeline.hpp"
#include "kglp/stats.hpp"

namespace {

constexpr const char* kVersion =
    "kglp 1.0.0 (formats: jsonl@1, checkpoint@1, entity-index@1)";

kglp::RunConfig resolve_config(const std::string& config_path,
                               const std::vector<std::string>& overrides) {
    kglp::RunConfig config;
    if (!config_path.empty()) config = kglp::load_run_config(config_path);
    for (const std::string& kv : overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("override must be key=value: " + kv);
        config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    config.validate();
    return config;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write output file: " + path);
    return out;
}

int cmd_stats(const std::string& train_path, const std::string& test_path,
              const std::string& json_path) {
    kglp::Interners interners;
    auto train = kglp::load_triples(train_path, interners);
    std::vector<kglp::Triple> test;
    if (!test_path.empty()) test = kglp::load_triples(test_path, interners);
    auto train_samples = kglp::build_samples(train);
    auto test_samples = kglp::build_samples(test);
    auto stats = kglp::compute_stats(train, test, train_samples, test_samples);
    kglp::write_stats_text(std::cout, stats);
    if (!json_path.empty()) {
        auto out = open_output(json_path);
        out << kglp::stats_to_json(stats) << '\n';
    }
    return 0;
}

int cmd_build_samples(const std::string& triples_path, const std::string& out_path,
                      const std::string& index_path) {
    kglp::Interners interners;
    auto triples = kglp::load_triples(triples_path, interners);
    auto samples = kglp::build_samples(triples);
    auto out = open_output(out_path);
    kglp::write_samples_jsonl(out, samples, interners);
    if (!index_path.empty()) {
        kglp::LabelSpace labels;
        auto index = kglp::EntityIndex::from_triples(triples);
        for (kglp::EntityId e : index.entities()) labels.add(interners.entities.name(e));
        auto index_out = open_output(index_path);
        kglp::write_label_space(index_out, labels);
    }
    return 0;
}

int cmd_shorten(const std::string& in_path, const std::string& out_path) {
    std::ifstream in(in_path);
    if (!in) throw std::runtime_error("cannot open descriptions file: " + in_path);
    auto out = open_output(out_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw std::runtime_error(in_path + ":" + std::to_string(line_no) +
                                     ": expected 2 tab-separated fields");
        out << line.substr(0, tab) << '\t' << kglp::shorten_description(line.substr(tab + 1))
            << '\n';
    }
    return 0;
}

int cmd_desc_stats(const std::string& path, bool shorten) {
    kglp::Interners interners;
    auto store = kglp::load_descriptions(path, interners);
    if (shorten) store = kglp::shorten_all(store);
    kglp::WhitespaceTokenizer tokenizer;
    std::cout << "n_descriptions: " << store.size() << '\n'
              << "mean_tokens: " << kglp::mean_description_tokens(store, tokenizer) << '\n';
    return 0;
}

int cmd_assemble(const std::string& triples_path, const std::string& descriptions_path,
                 const std::string& samples_path, const std::string& out_path,
                 const kglp::RunConfig& config) {
    kglp::Interners interners;
    auto triples = kglp::load_triples(triples_path, interners);
    kglp::DescriptionStore store;
    if (!descriptions_path.empty()) store = kglp::load_descriptions(descriptions_path, interners);
    if (config.shorten) store = kglp::shorten_all(store);
    std::ifstream samples_in(samples_path);
    if (!samples_in) throw std::runtime_error("cannot open samples file: " + samples_path);
    auto samples = kglp::read_samples_jsonl(samples_in, interners, samples_path);

    kglp::KnowledgeGraph graph(triples, interners.entities.size());
    kglp::WhitespaceTokenizer tokenizer;
    tokenizer.add_entity_atoms(interners.entities);
    auto provider = config.make_provider();
    auto assembled = kglp::assemble_dataset(samples, graph, interners, store, tokenizer,
                                            *provider, config.assembler_config(), config.workers);
    auto out = open_output(out_path);
    kglp::write_jsonl_header(out, "assembled", config.fingerprint());
    kglp::write_assembled_jsonl(out, assembled, samples, interners);
    return 0;
}

int cmd_train(const std::string& assembled_path, const std::string& index_path,
              const std::string& checkpoint_path, const std::string& log_path,
              const kglp::RunConfig& config) {
    auto file = kglp::load_assembled_jsonl(assembled_path);
    std::ifstream index_in(index_path);
    if (!index_in) throw std::runtime_error("cannot open entity index: " + index_path);
    auto labels = kglp::read_label_space(index_in, index_path);

    kglp::WhitespaceTokenizer tokenizer;
    for (const std::string& s : labels.surfaces()) tokenizer.add_atom(s);
    auto vocab = kglp::build_vocab(file.rows, tokenizer);
    auto encoded = kglp::encode_rows(file.rows, vocab, tokenizer, labels, kglp::LabelMode::Train);
    auto params = kglp::ModelParams::init(vocab.size(), config.b, labels.size(), config.seed);
    auto result = kglp::train(std::move(params), std::move(encoded.samples),
                              config.train_config());

    kglp::Checkpoint ckpt{std::move(result.params), std::move(vocab), std::move(labels),
                          config.fingerprint()};
    kglp::save_checkpoint_file(checkpoint_path, ckpt);
    if (!log_path.empty()) {
        auto out = open_output(log_path);
        kglp::write_jsonl_header(out, "stage-log", config.fingerprint());
        result.log.write_jsonl(out);
    }
    return 0;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& assembled_path,
             const std::string& json_path, double threshold) {
    auto ckpt = kglp::load_checkpoint_file(checkpoint_path);
    auto file = kglp::load_assembled_jsonl(assembled_path);
    if (!file.fingerprint.empty() && file.fingerprint != ckpt.fingerprint)
        std::cerr << "warning: assembled inputs fingerprint " << file.fingerprint
                  << " does not match checkpoint fingerprint " << ckpt.fingerprint << "\n";

    kglp::WhitespaceTokenizer tokenizer;
    for (const std::string& s : ckpt.labels.surfaces()) tokenizer.add_atom(s);
    // any phrase that was atomic during training survives in the vocab
    for (std::uint32_t i = 0; i < ckpt.vocab.size(); ++i)
        tokenizer.add_atom(ckpt.vocab.token(i));
    auto encoded =
        kglp::encode_rows(file.rows, ckpt.vocab, tokenizer, ckpt.labels, kglp::LabelMode::Test);
    std::vector<std::size_t> ks;
    for (std::size_t k : {1u, 3u, 5u})
        if (k <= ckpt.labels.size()) ks.push_back(k);
    auto report = kglp::evaluate(ckpt.params, encoded.samples, ks, threshold);
    report.fingerprint = ckpt.fingerprint;
    std::cout << report.to_table();
    if (!json_path.empty()) {
        auto out = open_output(json_path);
        out << report.to_json() << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Extreme multi-label knowledge-graph link prediction toolkit"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "key=value config file");
    app.add_option("--set", overrides, "config override key=value (wins over --config)");

    std::string train_path, test_path, descriptions_path, samples_path, assembled_path;
    std::string index_path, checkpoint_path, log_path, out_path, json_path;
    bool shorten_flag = false;
    double threshold = 0.5;

    auto* stats = app.add_subcommand("stats", "Dataset statistics report");
    stats->add_option("--train", train_path, "training triples TSV")->required();
    stats->add_option("--test", test_path, "test triples TSV");
    stats->add_option("--json", json_path, "also write a JSON report here");

    auto* build = app.add_subcommand("build-samples", "Group triples into multi-label samples");
    build->add_option("--triples", train_path, "triples TSV")->required();
    build->add_option("--out", out_path, "samples JSONL output")->required();
    build->add_option("--index-out", index_path, "also write the entity index here");

    auto* shorten = app.add_subcommand("shorten-descriptions",
                                       "Keep the content before the first semicolon");
    shorten->add_option("--in", descriptions_path, "descriptions TSV input")->required();
    shorten->add_option("--out", out_path, "descriptions TSV output")->required();

    auto* desc_stats = app.add_subcommand("desc-stats", "Mean token count of a description set");
    desc_stats->add_option("--in", descriptions_path, "descriptions TSV input")->required();
    desc_stats->add_flag("--shorten", shorten_flag, "apply the semicolon rule first");

    auto* assemble = app.add_subcommand("assemble", "Build retrieval-augmented raw-text inputs");
    assemble->add_option("--triples", train_path, "graph triples TSV")->required();
    assemble->add_option("--descriptions", descriptions_path, "descriptions TSV");
    assemble->add_option("--samples", samples_path, "samples JSONL")->required();
    assemble->add_option("--out", out_path, "assembled JSONL output")->required();

    auto* train_cmd = app.add_subcommand("train", "Three-stage training on assembled inputs");
    train_cmd->add_option("--assembled", assembled_path, "assembled JSONL")->required();
    train_cmd->add_option("--index", index_path, "entity index file")->required();
    train_cmd->add_option("--checkpoint", checkpoint_path, "checkpoint output")->required();
    train_cmd->add_option("--log", log_path, "stage log JSONL output");

    auto* eval_cmd = app.add_subcommand("eval", "P@k / recall report for a checkpoint");
    eval_cmd->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
    eval_cmd->add_option("--assembled", assembled_path, "assembled JSONL")->required();
    eval_cmd->add_option("--json", json_path, "also write a JSON report here");
    eval_cmd->add_option("--threshold", threshold, "binarization threshold for recall");

    auto* pipeline = app.add_subcommand("pipeline", "stats -> samples -> assemble -> train -> eval");
    pipeline->add_option("--out", out_path, "artifact directory (overrides out_dir)");

    for (auto* sub : {stats, build, shorten, desc_stats, assemble, train_cmd, eval_cmd, pipeline})
        sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    std::string active = app.get_subcommands().front()->get_name();
    try {
        kglp::RunConfig config = resolve_config(config_path, overrides);
        if (stats->parsed()) return cmd_stats(train_path, test_path, json_path);
        if (build->parsed()) return cmd_build_samples(train_path, out_path, index_path);
        if (shorten->parsed()) return cmd_shorten(descriptions_path, out_path);
        if (desc_stats->parsed()) return cmd_desc_stats(descriptions_path, shorten_flag);
        if (assemble->parsed())
            return cmd_assemble(train_path, descriptions_path, samples_path, out_path, config);
        if (train_cmd->parsed())
            return cmd_train(assembled_path, index_path, checkpoint_path, log_path, config);
        if (eval_cmd->parsed())
            return cmd_eval(checkpoint_path, assembled_path, json_path, threshold);
        if (pipeline->parsed()) {
            if (!out_path.empty()) config.set("out_dir", out_path);
            auto result = kglp::run_pipeline(config, &std::cerr);
            std::cout << result.eval.to_table();
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error [" << active << "]: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

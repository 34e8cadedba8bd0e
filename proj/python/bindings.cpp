#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "kglp/pipeline.hpp"
#include "kglp/stats.hpp"

namespace py = pybind11;

namespace {

using StringTriple = std::tuple<std::string, std::string, std::string>;

std::vector<kglp::Triple> intern_triples(const std::vector<StringTriple>& triples,
                                         kglp::Interners& interners) {
    std::vector<kglp::Triple> out;
    out.reserve(triples.size());
    for (const auto& [h, r, t] : triples) {
        kglp::Triple triple;
        triple.head = interners.entities.intern(h);
        triple.relation = interners.relations.intern(r);
        triple.tail = interners.entities.intern(t);
        out.push_back(triple);
    }
    return out;
}

std::vector<std::uint8_t> to_binary(const std::vector<int>& y) {
    std::vector<std::uint8_t> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] ? 1 : 0;
    return out;
}

py::list samples_to_py(const kglp::SampleSet& samples, const kglp::Interners& interners) {
    py::list out;
    for (const auto& s : samples.samples) {
        py::dict d;
        d["masked_side"] = std::string(kglp::to_string(s.pattern.masked_side));
        d["relation"] = interners.relations.name(s.pattern.relation);
        d["given"] = interners.entities.name(s.pattern.given);
        py::list labels;
        for (kglp::EntityId e : s.labels) labels.append(interners.entities.name(e));
        d["labels"] = labels;
        out.append(d);
    }
    return out;
}

py::list py_build_samples(const std::vector<StringTriple>& triples) {
    kglp::Interners interners;
    auto interned = intern_triples(triples, interners);
    return samples_to_py(kglp::build_samples(interned), interners);
}

py::dict py_graph_stats(const std::vector<StringTriple>& train,
                        const std::vector<StringTriple>& test) {
    kglp::Interners interners;
    auto train_t = intern_triples(train, interners);
    auto test_t = intern_triples(test, interners);
    auto stats = kglp::compute_stats(train_t, test_t, kglp::build_samples(train_t),
                                     kglp::build_samples(test_t));
    py::dict d;
    d["n_nodes"] = stats.n_nodes;
    d["n_relations"] = stats.n_relations;
    d["n_train_triples"] = stats.n_train_triples;
    d["n_test_triples"] = stats.n_test_triples;
    d["n_disconnected"] = stats.n_disconnected;
    d["avg_one_hop"] = stats.avg_one_hop;
    d["n_train_samples"] = stats.n_train_samples;
    d["n_test_samples"] = stats.n_test_samples;
    d["n_labels"] = stats.n_labels;
    d["avg_labels_per_sample"] = stats.avg_labels_per_sample;
    d["avg_samples_per_label"] = stats.avg_samples_per_label;
    return d;
}

py::list py_assemble_inputs(const std::vector<StringTriple>& triples,
                            const std::map<std::string, std::string>& descriptions,
                            const std::string& strategy, std::size_t k_top,
                            std::size_t max_input_tokens, const std::string& provider_name,
                            bool exclude_answer_edges, bool use_descriptions,
                            bool include_one_hop) {
    kglp::Interners interners;
    auto interned = intern_triples(triples, interners);
    kglp::DescriptionStore store;
    for (const auto& [entity, text] : descriptions)
        store.put(interners.entities.intern(entity), text);

    kglp::KnowledgeGraph graph(interned, interners.entities.size());
    auto samples = kglp::build_samples(interned);
    kglp::WhitespaceTokenizer tokenizer;
    tokenizer.add_entity_atoms(interners.entities);

    std::unique_ptr<kglp::SimilarityProvider> provider;
    if (provider_name == "ngram") provider = std::make_unique<kglp::NgramCosineProvider>();
    else if (provider_name == "constant") provider = std::make_unique<kglp::ConstantProvider>();
    else throw std::runtime_error("provider must be 'ngram' or 'constant'");

    kglp::AssemblerConfig config;
    config.strategy = kglp::strategy_from_string(strategy);
    config.k_top = k_top;
    config.max_input_tokens = max_input_tokens;
    config.exclude_answer_edges = exclude_answer_edges;
    config.use_descriptions = use_descriptions;
    config.include_one_hop = include_one_hop;

    auto assembled =
        kglp::assemble_dataset(samples, graph, interners, store, tokenizer, *provider, config);
    py::list out;
    for (std::size_t i = 0; i < assembled.size(); ++i) {
        py::dict d;
        d["text"] = assembled[i].text;
        d["token_count"] = assembled[i].token_count;
        d["masked_side"] = std::string(kglp::to_string(samples.samples[i].pattern.masked_side));
        d["relation"] = interners.relations.name(samples.samples[i].pattern.relation);
        d["given"] = interners.entities.name(samples.samples[i].pattern.given);
        py::list labels;
        for (kglp::EntityId e : samples.samples[i].labels)
            labels.append(interners.entities.name(e));
        d["labels"] = labels;
        d["neighbors_used"] = assembled[i].neighbors_used;
        out.append(d);
    }
    return out;
}

py::dict py_run_pipeline(const std::map<std::string, std::string>& options) {
    kglp::RunConfig config;
    for (const auto& [key, value] : options) config.set(key, value);
    auto result = kglp::run_pipeline(config);
    py::dict d;
    d["fingerprint"] = result.fingerprint;
    py::list artifacts;
    for (const auto& a : result.artifacts) artifacts.append(a);
    d["artifacts"] = artifacts;
    py::dict p_at;
    for (const auto& [k, v] : result.eval.p_at) p_at[py::int_(k)] = v;
    d["p_at"] = p_at;
    d["recall"] = result.eval.recall;
    d["n_eval_samples"] = result.eval.n_samples;
    return d;
}

std::size_t py_count_tokens(const std::string& text, const std::vector<std::string>& atoms) {
    kglp::WhitespaceTokenizer tokenizer;
    for (const auto& a : atoms) tokenizer.add_atom(a);
    return kglp::count_tokens(text, tokenizer);
}

}  // namespace

PYBIND11_MODULE(_kglp, m) {
    m.doc() = "Extreme multi-label knowledge-graph link prediction toolkit";

    m.def("shorten_description", &kglp::shorten_description, py::arg("text"),
          "Content before the first semicolon, trailing whitespace trimmed");
    m.def("count_tokens", &py_count_tokens, py::arg("text"),
          py::arg("atoms") = std::vector<std::string>{},
          "Whitespace token count; multi-word atoms count once");
    m.def("ngram_similarity", &kglp::ngram_cosine, py::arg("a"), py::arg("b"),
          "Cosine similarity of character-3-gram frequency vectors");
    m.def(
        "lr_at",
        [](std::size_t step, std::size_t d_model, std::size_t warmup) {
            return kglp::lr_at(step, {d_model, warmup});
        },
        py::arg("step"), py::arg("d_model") = 768, py::arg("warmup") = 12000,
        "Inverse-square-root warmup learning rate");
    m.def(
        "loss_stage1",
        [](const std::vector<double>& y_hat, const std::vector<int>& y, double alpha) {
            return kglp::loss_stage1(y_hat, to_binary(y), alpha);
        },
        py::arg("y_hat"), py::arg("y"), py::arg("alpha"));
    m.def(
        "loss_stage23",
        [](const std::vector<double>& y_hat, const std::vector<int>& y, double alpha,
           double threshold) { return kglp::loss_stage23(y_hat, to_binary(y), alpha, threshold); },
        py::arg("y_hat"), py::arg("y"), py::arg("alpha"), py::arg("threshold") = 0.5);
    m.def(
        "sample_precision",
        [](const std::vector<double>& y_hat, const std::vector<int>& y, double threshold) {
            return kglp::sample_precision(y_hat, to_binary(y), threshold);
        },
        py::arg("y_hat"), py::arg("y"), py::arg("threshold") = 0.5);
    m.def(
        "precision_at_k",
        [](const std::vector<double>& scores, const std::vector<int>& y, std::size_t k) {
            return kglp::precision_at_k(scores, to_binary(y), k);
        },
        py::arg("scores"), py::arg("true_labels"), py::arg("k"));
    m.def(
        "recall_at_threshold",
        [](const std::vector<double>& y_hat, const std::vector<int>& y, double threshold) {
            return kglp::recall_at_threshold(y_hat, to_binary(y), threshold);
        },
        py::arg("y_hat"), py::arg("y"), py::arg("threshold") = 0.5);
    m.def("build_samples", &py_build_samples, py::arg("triples"),
          "Group (head, relation, tail) triples into multi-label samples");
    m.def("graph_stats", &py_graph_stats, py::arg("train"),
          py::arg("test") = std::vector<StringTriple>{});
    m.def("assemble_inputs", &py_assemble_inputs, py::arg("triples"),
          py::arg("descriptions") = std::map<std::string, std::string>{},
          py::arg("strategy") = "packed", py::arg("k_top") = 3,
          py::arg("max_input_tokens") = 512, py::arg("provider") = "ngram",
          py::arg("exclude_answer_edges") = true, py::arg("use_descriptions") = true,
          py::arg("include_one_hop") = true,
          "Retrieval-augmented raw-text inputs for every sample of a triple list");
    m.def("run_pipeline", &py_run_pipeline, py::arg("options"),
          "Full pipeline from config options; returns fingerprint, artifacts and eval summary");

    m.attr("__version__") = "1.0.0";
}

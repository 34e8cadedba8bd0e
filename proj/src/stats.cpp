#include "kglp/stats.hpp"

#include <ostream>
#include <unordered_set>

#include <json.hpp>

namespace kglp {

GraphStats compute_stats(std::span<const Triple> train, std::span<const Triple> test,
                         const SampleSet& train_samples, const SampleSet& test_samples) {
    GraphStats stats;
    stats.n_train_triples = train.size();
    stats.n_test_triples = test.size();
    stats.n_train_samples = train_samples.samples.size();
    stats.n_test_samples = test_samples.samples.size();

    std::unordered_set<EntityId> entities;
    std::unordered_set<RelationId> relations;
    EntityId max_entity = 0;
    for (const auto& split : {train, test}) {
        for (const Triple& t : split) {
            entities.insert(t.head);
            entities.insert(t.tail);
            relations.insert(t.relation);
            max_entity = std::max({max_entity, t.head, t.tail});
        }
    }
    stats.n_nodes = entities.size();
    stats.n_relations = relations.size();

    // Degrees over the train graph only; a self-loop counts twice.
    std::vector<std::size_t> degree(entities.empty() ? 0 : max_entity + 1, 0);
    for (const Triple& t : train) {
        ++degree[t.head];
        ++degree[t.tail];
    }
    std::size_t degree_sum = 2 * train.size();
    stats.avg_one_hop =
        stats.n_nodes == 0 ? 0.0 : static_cast<double>(degree_sum) / static_cast<double>(stats.n_nodes);

    // Disconnected: every incident edge of both endpoints is the triple itself.
    for (const Triple& t : train) {
        std::size_t self = (t.head == t.tail) ? 2 : 1;
        if (degree[t.head] == self && degree[t.tail] == self) ++stats.n_disconnected;
    }

    std::unordered_set<EntityId> label_entities;
    std::size_t total_labels = 0;
    for (const MultiLabelSample& s : train_samples.samples) {
        total_labels += s.labels.size();
        label_entities.insert(s.labels.begin(), s.labels.end());
    }
    stats.n_labels = label_entities.size();
    stats.avg_labels_per_sample =
        stats.n_train_samples == 0
            ? 0.0
            : static_cast<double>(total_labels) / static_cast<double>(stats.n_train_samples);
    stats.avg_samples_per_label =
        stats.n_labels == 0
            ? 0.0
            : static_cast<double>(total_labels) / static_cast<double>(stats.n_labels);
    return stats;
}

void write_stats_text(std::ostream& out, const GraphStats& s) {
    out << "n_nodes: " << s.n_nodes << '\n'
        << "n_relations: " << s.n_relations << '\n'
        << "n_train_triples: " << s.n_train_triples << '\n'
        << "n_test_triples: " << s.n_test_triples << '\n'
        << "n_disconnected: " << s.n_disconnected << '\n'
        << "avg_one_hop: " << s.avg_one_hop << '\n'
        << "n_train_samples: " << s.n_train_samples << '\n'
        << "n_test_samples: " << s.n_test_samples << '\n'
        << "n_labels: " << s.n_labels << '\n'
        << "avg_labels_per_sample: " << s.avg_labels_per_sample << '\n'
        << "avg_samples_per_label: " << s.avg_samples_per_label << '\n';
}

std::string stats_to_json(const GraphStats& s) {
    nlohmann::json j;
    j["n_nodes"] = s.n_nodes;
    j["n_relations"] = s.n_relations;
    j["n_train_triples"] = s.n_train_triples;
    j["n_test_triples"] = s.n_test_triples;
    j["n_disconnected"] = s.n_disconnected;
    j["avg_one_hop"] = s.avg_one_hop;
    j["n_train_samples"] = s.n_train_samples;
    j["n_test_samples"] = s.n_test_samples;
    j["n_labels"] = s.n_labels;
    j["avg_labels_per_sample"] = s.avg_labels_per_sample;
    j["avg_samples_per_label"] = s.avg_samples_per_label;
    return j.dump(2);
}

}  // namespace kglp

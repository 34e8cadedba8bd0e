#include "kglp/samples.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

namespace kglp {

namespace {

struct PatternHash {
    std::size_t operator()(const IncompletePattern& p) const {
        std::size_t h = std::hash<std::uint64_t>{}(
            (std::uint64_t(p.relation) << 32) | p.given);
        return h * 31 + static_cast<std::size_t>(p.masked_side);
    }
};

}  // namespace

const char* to_string(MaskedSide side) {
    return side == MaskedSide::Head ? "head" : "tail";
}

MaskedSide masked_side_from_string(std::string_view s) {
    if (s == "head") return MaskedSide::Head;
    if (s == "tail") return MaskedSide::Tail;
    throw std::runtime_error("unknown masked_side: " + std::string(s));
}

SampleSet build_samples(std::span<const Triple> triples) {
    SampleSet set;
    std::unordered_map<IncompletePattern, std::uint32_t, PatternHash> slot;
    std::unordered_set<std::uint64_t> seen_labels;  // (sample slot, label) pairs

    auto add = [&](const IncompletePattern& pattern, EntityId label) {
        auto [it, inserted] = slot.emplace(pattern, static_cast<std::uint32_t>(set.samples.size()));
        if (inserted) set.samples.push_back({pattern, {}});
        MultiLabelSample& sample = set.samples[it->second];
        std::uint64_t key = (std::uint64_t(it->second) << 32) | label;
        if (seen_labels.insert(key).second) sample.labels.push_back(label);
    };

    for (const Triple& t : triples) {
        add({t.relation, t.head, MaskedSide::Tail}, t.tail);
        add({t.relation, t.tail, MaskedSide::Head}, t.head);
    }
    return set;
}

EntityIndex EntityIndex::from_triples(std::span<const Triple> triples) {
    EntityIndex index;
    auto add = [&](EntityId e) {
        auto [it, inserted] =
            index.columns_.emplace(e, static_cast<std::uint32_t>(index.entities_.size()));
        (void)it;
        if (inserted) index.entities_.push_back(e);
    };
    for (const Triple& t : triples) {
        add(t.head);
        add(t.tail);
    }
    return index;
}

std::uint32_t EntityIndex::column(EntityId entity) const {
    auto it = columns_.find(entity);
    return it == columns_.end() ? npos : it->second;
}

PositiveColumns positive_columns(const MultiLabelSample& sample, const EntityIndex& index,
                                 LabelMode mode, const Interners& interners) {
    PositiveColumns out;
    out.columns.reserve(sample.labels.size());
    for (EntityId label : sample.labels) {
        std::uint32_t col = index.column(label);
        if (col == EntityIndex::npos) {
            if (mode == LabelMode::Train)
                throw std::runtime_error("label entity not in training index: " +
                                         interners.entities.name(label));
            ++out.dropped;
            continue;
        }
        out.columns.push_back(col);
    }
    return out;
}

LabelVector label_vector(const MultiLabelSample& sample, const EntityIndex& index,
                         LabelMode mode, const Interners& interners) {
    PositiveColumns cols = positive_columns(sample, index, mode, interners);
    LabelVector out;
    out.bits.assign(index.k(), 0);
    out.dropped = cols.dropped;
    for (std::uint32_t c : cols.columns) out.bits[c] = 1;
    return out;
}

void write_samples_jsonl(std::ostream& out, const SampleSet& set, const Interners& interners) {
    for (const MultiLabelSample& s : set.samples) {
        nlohmann::json row;
        row["masked_side"] = to_string(s.pattern.masked_side);
        row["relation"] = interners.relations.name(s.pattern.relation);
        row["given"] = interners.entities.name(s.pattern.given);
        nlohmann::json labels = nlohmann::json::array();
        for (EntityId e : s.labels) labels.push_back(interners.entities.name(e));
        row["labels"] = std::move(labels);
        out << row.dump() << '\n';
    }
}

SampleSet read_samples_jsonl(std::istream& in, Interners& interners, const std::string& source) {
    SampleSet set;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json row;
        try {
            row = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error(source + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (line_no == 1 && row.contains("format")) continue;  // toolkit metadata line
        MultiLabelSample sample;
        try {
            sample.pattern.masked_side =
                masked_side_from_string(row.at("masked_side").get<std::string>());
            sample.pattern.relation =
                interners.relations.intern(row.at("relation").get<std::string>());
            sample.pattern.given = interners.entities.intern(row.at("given").get<std::string>());
            for (const auto& label : row.at("labels"))
                sample.labels.push_back(interners.entities.intern(label.get<std::string>()));
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error(source + ":" + std::to_string(line_no) + ": " + e.what());
        }
        set.samples.push_back(std::move(sample));
    }
    return set;
}

}  // namespace kglp

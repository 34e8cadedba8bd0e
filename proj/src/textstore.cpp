#include "kglp/textstore.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <stdexcept>

namespace kglp {

const std::string DescriptionStore::kEmpty;

void DescriptionStore::put(EntityId entity, std::string text) {
    auto [it, inserted] = texts_.insert_or_assign(entity, std::move(text));
    (void)it;
    if (!inserted) ++overwrites_;
}

const std::string& DescriptionStore::get(EntityId entity) const {
    auto it = texts_.find(entity);
    if (it == texts_.end()) {
        misses_.fetch_add(1, std::memory_order_relaxed);
        return kEmpty;
    }
    return it->second;
}

DescriptionStore parse_descriptions(std::istream& in, Interners& interners,
                                    const std::string& source) {
    DescriptionStore store;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
            throw std::runtime_error(source + ":" + std::to_string(line_no) +
                                     ": expected 2 tab-separated fields");
        }
        EntityId entity = interners.entities.intern(std::string_view(line).substr(0, tab));
        store.put(entity, line.substr(tab + 1));
    }
    return store;
}

DescriptionStore load_descriptions(const std::string& path, Interners& interners) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open descriptions file: " + path);
    return parse_descriptions(in, interners, path);
}

std::string shorten_description(std::string_view text) {
    auto semi = text.find(';');
    std::string_view prefix = semi == std::string_view::npos ? text : text.substr(0, semi);
    while (!prefix.empty() && (prefix.back() == ' ' || prefix.back() == '\t'))
        prefix.remove_suffix(1);
    return std::string(prefix);
}

DescriptionStore shorten_all(const DescriptionStore& store) {
    DescriptionStore out;
    for (const auto& [entity, text] : store.all()) out.put(entity, shorten_description(text));
    return out;
}

namespace {

std::vector<std::string_view> split_whitespace(std::string_view text) {
    std::vector<std::string_view> words;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) words.push_back(text.substr(start, i - start));
    }
    return words;
}

}  // namespace

void WhitespaceTokenizer::add_atom(std::string_view surface) {
    auto words = split_whitespace(surface);
    if (words.size() < 2) return;  // single words tokenize to themselves
    std::string normalized;
    for (const auto& w : words) {
        if (!normalized.empty()) normalized += ' ';
        normalized += w;
    }
    max_atom_words_ = std::max(max_atom_words_, words.size());
    atoms_.insert(std::move(normalized));
}

void WhitespaceTokenizer::add_entity_atoms(const SymbolTable& entities) {
    for (std::uint32_t id = 0; id < entities.size(); ++id) add_atom(entities.name(id));
}

std::vector<std::string> WhitespaceTokenizer::tokenize(std::string_view text) const {
    auto words = split_whitespace(text);
    std::vector<std::string> tokens;
    tokens.reserve(words.size());
    std::size_t i = 0;
    while (i < words.size()) {
        std::size_t matched = 0;
        if (!atoms_.empty()) {
            std::size_t limit = std::min(max_atom_words_, words.size() - i);
            std::string candidate;
            for (std::size_t len = limit; len >= 2; --len) {
                candidate.clear();
                for (std::size_t j = 0; j < len; ++j) {
                    if (j) candidate += ' ';
                    candidate += words[i + j];
                }
                if (atoms_.contains(candidate)) {
                    tokens.push_back(std::move(candidate));
                    matched = len;
                    break;
                }
            }
        }
        if (matched == 0) {
            tokens.emplace_back(words[i]);
            matched = 1;
        }
        i += matched;
    }
    return tokens;
}

std::size_t count_tokens(std::string_view text, const Tokenizer& tokenizer) {
    return tokenizer.tokenize(text).size();
}

double mean_description_tokens(const DescriptionStore& store, const Tokenizer& tokenizer) {
    if (store.size() == 0) return 0.0;
    std::size_t total = 0;
    for (const auto& [entity, text] : store.all()) {
        (void)entity;
        total += count_tokens(text, tokenizer);
    }
    return static_cast<double>(total) / static_cast<double>(store.size());
}

}  // namespace kglp

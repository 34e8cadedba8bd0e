#include "kglp/similarity.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kglp {

namespace {

std::unordered_map<std::string, std::size_t> trigram_counts(std::string_view text) {
    std::unordered_map<std::string, std::size_t> counts;
    if (text.size() >= 3) {
        for (std::size_t i = 0; i + 3 <= text.size(); ++i)
            ++counts[std::string(text.substr(i, 3))];
    }
    return counts;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0 || nb == 0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

double ngram_cosine(std::string_view a, std::string_view b) {
    auto ca = trigram_counts(a);
    auto cb = trigram_counts(b);
    if (ca.empty() || cb.empty()) return 0.0;
    double dot = 0, na = 0, nb = 0;
    for (const auto& [gram, count] : ca) {
        na += static_cast<double>(count) * static_cast<double>(count);
        auto it = cb.find(gram);
        if (it != cb.end()) dot += static_cast<double>(count) * static_cast<double>(it->second);
    }
    for (const auto& [gram, count] : cb)
        nb += static_cast<double>(count) * static_cast<double>(count);
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

double NgramCosineProvider::score(std::string_view a, std::string_view b) const {
    return ngram_cosine(a, b);
}

PrecomputedVectorProvider PrecomputedVectorProvider::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open vector file: " + path);
    PrecomputedVectorProvider provider;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected key<TAB>floats");
        std::vector<double> vec;
        std::istringstream values(line.substr(tab + 1));
        double v;
        while (values >> v) vec.push_back(v);
        if (vec.empty() || !values.eof())
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": malformed vector row");
        if (provider.dimension_ == 0) provider.dimension_ = vec.size();
        if (vec.size() != provider.dimension_)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": dimension mismatch, expected " +
                                     std::to_string(provider.dimension_));
        provider.vectors_[line.substr(0, tab)] = std::move(vec);
    }
    return provider;
}

double PrecomputedVectorProvider::score(std::string_view a, std::string_view b) const {
    auto ita = vectors_.find(std::string(a));
    if (ita == vectors_.end())
        throw std::runtime_error("vectors provider: no row for text: " + std::string(a));
    auto itb = vectors_.find(std::string(b));
    if (itb == vectors_.end())
        throw std::runtime_error("vectors provider: no row for text: " + std::string(b));
    return cosine(ita->second, itb->second);
}

}  // namespace kglp

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "kglp/model.hpp"

namespace kglp {

/// The ordered classification columns, by entity surface form.
class LabelSpace {
public:
    std::uint32_t add(const std::string& surface);
    std::uint32_t column(const std::string& surface) const;  // npos when absent
    const std::string& surface(std::uint32_t column) const { return surfaces_[column]; }
    std::size_t size() const { return surfaces_.size(); }
    const std::vector<std::string>& surfaces() const { return surfaces_; }

    static constexpr std::uint32_t npos = 0xffffffffu;

private:
    std::vector<std::string> surfaces_;
    std::unordered_map<std::string, std::uint32_t> columns_;
};

/// One line per surface after a "kglp-entity-index 1" header.
void write_label_space(std::ostream& out, const LabelSpace& labels);
LabelSpace read_label_space(std::istream& in, const std::string& source);

/// Versioned plain-text parameter dump. Doubles are written with 17
/// significant digits so the round trip is exact.
struct Checkpoint {
    ModelParams params;
    TokenVocab vocab;
    LabelSpace labels;
    std::string fingerprint;
};

void save_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint load_checkpoint(std::istream& in, const std::string& source);

void save_checkpoint_file(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint_file(const std::string& path);

}  // namespace kglp

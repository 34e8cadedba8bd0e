#include "kglp/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kglp {

namespace {

constexpr const char* kIndexHeader = "kglp-entity-index 1";
constexpr const char* kCheckpointHeader = "kglp-checkpoint 1";

void write_double(std::ostream& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
}

void write_matrix(std::ostream& out, const char* tag, const Matrix& m) {
    out << tag << ' ' << m.rows << ' ' << m.cols << '\n';
    for (std::size_t r = 0; r < m.rows; ++r) {
        const double* row = m.row(r);
        for (std::size_t c = 0; c < m.cols; ++c) {
            if (c) out << ' ';
            write_double(out, row[c]);
        }
        out << '\n';
    }
}

Matrix read_matrix(std::istream& in, const char* tag, const std::string& source) {
    std::string seen;
    std::size_t rows = 0, cols = 0;
    if (!(in >> seen >> rows >> cols) || seen != tag)
        throw std::runtime_error(source + ": expected '" + tag + "' section");
    Matrix m(rows, cols);
    for (double& v : m.data)
        if (!(in >> v)) throw std::runtime_error(source + ": truncated " + tag + " matrix");
    return m;
}

std::string read_line_checked(std::istream& in, const std::string& source) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(source + ": unexpected end of file");
    return line;
}

}  // namespace

std::uint32_t LabelSpace::add(const std::string& surface) {
    auto [it, inserted] = columns_.emplace(surface, static_cast<std::uint32_t>(surfaces_.size()));
    if (inserted) surfaces_.push_back(surface);
    return it->second;
}

std::uint32_t LabelSpace::column(const std::string& surface) const {
    auto it = columns_.find(surface);
    return it == columns_.end() ? npos : it->second;
}

void write_label_space(std::ostream& out, const LabelSpace& labels) {
    out << kIndexHeader << '\n';
    for (const std::string& s : labels.surfaces()) out << s << '\n';
}

LabelSpace read_label_space(std::istream& in, const std::string& source) {
    if (read_line_checked(in, source) != kIndexHeader)
        throw std::runtime_error(source + ": not a kglp entity index file");
    LabelSpace labels;
    std::string line;
    // every line is a surface form, including an empty one; columns must not shift
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        labels.add(line);
    }
    return labels;
}

void save_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
    out << kCheckpointHeader << '\n';
    out << "fingerprint " << ckpt.fingerprint << '\n';
    out << "vocab " << ckpt.vocab.size() << '\n';
    for (std::uint32_t i = 0; i < ckpt.vocab.size(); ++i) out << ckpt.vocab.token(i) << '\n';
    out << "labels " << ckpt.labels.size() << '\n';
    for (const std::string& s : ckpt.labels.surfaces()) out << s << '\n';
    write_matrix(out, "embeddings", ckpt.params.token_embeddings);
    write_matrix(out, "classifier", ckpt.params.classifier_weights);
    out << "bias " << ckpt.params.classifier_bias.size() << '\n';
    for (std::size_t i = 0; i < ckpt.params.classifier_bias.size(); ++i) {
        if (i) out << ' ';
        write_double(out, ckpt.params.classifier_bias[i]);
    }
    out << '\n';
}

Checkpoint load_checkpoint(std::istream& in, const std::string& source) {
    if (read_line_checked(in, source) != kCheckpointHeader)
        throw std::runtime_error(source + ": not a kglp checkpoint (or unsupported version)");
    Checkpoint ckpt;
    std::string word;
    std::size_t count = 0;

    std::istringstream fp_line(read_line_checked(in, source));
    if (!(fp_line >> word >> ckpt.fingerprint) || word != "fingerprint")
        throw std::runtime_error(source + ": missing fingerprint line");

    std::istringstream vocab_line(read_line_checked(in, source));
    if (!(vocab_line >> word >> count) || word != "vocab")
        throw std::runtime_error(source + ": missing vocab section");
    for (std::size_t i = 0; i < count; ++i) {
        std::string token = read_line_checked(in, source);
        if (i == 0) {
            if (token != "[UNK]") throw std::runtime_error(source + ": vocab must start with [UNK]");
            continue;  // the constructor provides it
        }
        ckpt.vocab.add(token);
    }

    std::istringstream label_line(read_line_checked(in, source));
    if (!(label_line >> word >> count) || word != "labels")
        throw std::runtime_error(source + ": missing labels section");
    for (std::size_t i = 0; i < count; ++i) ckpt.labels.add(read_line_checked(in, source));

    ckpt.params.token_embeddings = read_matrix(in, "embeddings", source);
    ckpt.params.classifier_weights = read_matrix(in, "classifier", source);
    if (!(in >> word >> count) || word != "bias")
        throw std::runtime_error(source + ": missing bias section");
    ckpt.params.classifier_bias.resize(count);
    for (double& v : ckpt.params.classifier_bias)
        if (!(in >> v)) throw std::runtime_error(source + ": truncated bias vector");

    if (ckpt.params.token_embeddings.rows != ckpt.vocab.size())
        throw std::runtime_error(source + ": embedding rows do not match vocab size");
    if (ckpt.params.classifier_weights.rows != ckpt.labels.size() ||
        ckpt.params.classifier_bias.size() != ckpt.labels.size())
        throw std::runtime_error(source + ": classifier shape does not match label count");
    return ckpt;
}

void save_checkpoint_file(const std::string& path, const Checkpoint& ckpt) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    save_checkpoint(out, ckpt);
}

Checkpoint load_checkpoint_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    return load_checkpoint(in, path);
}

}  // namespace kglp

#include "dsl/data_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "dsl/error.hpp"

namespace dsl {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string_view> split(std::string_view line, char delimiter) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(delimiter, start);
        cells.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return cells;
}

std::optional<double> parse_real(std::string_view s) {
    double v = 0.0;
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::optional<std::size_t> parse_index(std::string_view s) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::string location(std::size_t row, std::size_t column) {
    return "row " + std::to_string(row) + ", column " + std::to_string(column);
}

}  // namespace

std::vector<int> encode_labels(std::span<const std::string> labels, std::vector<std::string>& names,
                               bool extend) {
    std::unordered_map<std::string, int> ids;
    for (std::size_t c = 0; c < names.size(); ++c) ids.emplace(names[c], static_cast<int>(c));
    std::vector<int> out;
    out.reserve(labels.size());
    for (const auto& label : labels) {
        auto it = ids.find(label);
        if (it == ids.end()) {
            if (!extend) throw DataError("unknown class label '" + label + "'");
            it = ids.emplace(label, static_cast<int>(names.size())).first;
            names.push_back(label);
        }
        out.push_back(it->second);
    }
    return out;
}

// ---------------------------------------------------------------------------

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());

    std::string line;
    std::size_t row = 0;
    std::optional<std::size_t> label_index;
    std::size_t width = 0;

    auto resolve_label = [&](const std::vector<std::string_view>& header) {
        if (options.label_column.empty()) return;
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (header[c] == options.label_column) {
                label_index = c;
                return;
            }
        }
        if (auto idx = parse_index(options.label_column); idx && *idx < header.size()) {
            label_index = *idx;
            return;
        }
        throw DataError(path.string() + ": label column '" + options.label_column + "' not found");
    };

    std::vector<double> values;
    std::vector<std::string> raw_labels;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto cells = split(line, options.delimiter);
        if (width == 0) {
            width = cells.size();
            resolve_label(cells);
            if (options.has_header) continue;
        }
        if (cells.size() != width) {
            throw DataError(path.string() + ": row " + std::to_string(row) + " has " +
                            std::to_string(cells.size()) + " cells, expected " + std::to_string(width));
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (label_index && c == *label_index) {
                raw_labels.emplace_back(cells[c]);
                continue;
            }
            const auto v = parse_real(cells[c]);
            if (!v) {
                throw DataError(path.string() + ": parse error at " + location(row, c + 1) + ": '" +
                                std::string(cells[c]) + "' is not a finite number");
            }
            values.push_back(*v);
        }
    }
    const std::size_t features = label_index ? width - 1 : width;
    if (width == 0 || values.empty() || features == 0) throw DataError(path.string() + ": no data rows");
    const std::size_t n = values.size() / features;

    std::optional<LabelVector> labels;
    std::vector<std::string> names;
    if (label_index) {
        const bool extend = !options.known_classes.has_value();
        if (!extend) names = *options.known_classes;
        auto ids = encode_labels(raw_labels, names, extend);
        if (names.size() < 2) throw DataError(path.string() + ": labels need at least two classes");
        labels = LabelVector(std::move(ids), static_cast<int>(names.size()));
    }
    return Dataset(FeatureMatrix(n, features, std::move(values)), std::move(labels), std::move(names));
}

void write_probabilities_csv(const std::filesystem::path& path, const ProbabilityMatrix& probs,
                             std::span<const std::string> class_names) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    for (std::size_t c = 0; c < probs.cols(); ++c) {
        if (c) out << ',';
        out << (c < class_names.size() ? class_names[c] : std::to_string(c));
    }
    out << '\n';
    char buffer[64];
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        for (std::size_t c = 0; c < probs.cols(); ++c) {
            if (c) out << ',';
            // Shortest round-trip representation.
            const auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, probs(i, c));
            out.write(buffer, end - buffer);
        }
        out << '\n';
    }
    if (!out) throw DataError("write failed: " + path.string());
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::uint8_t> read_all_gz(const std::filesystem::path& path) {
    gzFile file = gzopen(path.string().c_str(), "rb");
    if (file == nullptr) throw DataError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes;
    std::uint8_t buffer[1 << 16];
    for (;;) {
        const int got = gzread(file, buffer, sizeof buffer);
        if (got < 0) {
            gzclose(file);
            throw DataError("read error (corrupt gzip?) in " + path.string());
        }
        if (got == 0) break;
        bytes.insert(bytes.end(), buffer, buffer + got);
    }
    gzclose(file);
    return bytes;
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& b, std::size_t at) {
    return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) |
           (std::uint32_t{b[at + 2]} << 8) | std::uint32_t{b[at + 3]};
}

}  // namespace

IdxTensor read_idx(const std::filesystem::path& path) {
    const auto bytes = read_all_gz(path);
    if (bytes.size() < 4) throw DataError(path.string() + ": truncated IDX header");
    // Magic: two zero bytes, type code 0x08 (unsigned byte), dimension count.
    if (bytes[0] != 0 || bytes[1] != 0 || bytes[2] != 0x08 || bytes[3] == 0) {
        throw DataError(path.string() + ": bad IDX magic");
    }
    const std::size_t rank = bytes[3];
    if (bytes.size() < 4 + 4 * rank) throw DataError(path.string() + ": truncated IDX header");
    IdxTensor tensor;
    std::size_t count = 1;
    for (std::size_t d = 0; d < rank; ++d) {
        tensor.dims.push_back(read_be32(bytes, 4 + 4 * d));
        count *= tensor.dims.back();
    }
    const std::size_t offset = 4 + 4 * rank;
    if (bytes.size() - offset < count) {
        throw DataError(path.string() + ": truncated IDX payload (" + std::to_string(bytes.size() - offset) +
                        " of " + std::to_string(count) + " bytes)");
    }
    if (bytes.size() - offset > count) throw DataError(path.string() + ": trailing bytes after IDX payload");
    tensor.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset), bytes.end());
    return tensor;
}

void write_idx(const std::filesystem::path& path, const IdxTensor& tensor) {
    std::vector<std::uint8_t> bytes{0, 0, 0x08, static_cast<std::uint8_t>(tensor.dims.size())};
    std::size_t count = 1;
    for (std::uint32_t d : tensor.dims) {
        for (int s = 24; s >= 0; s -= 8) bytes.push_back(static_cast<std::uint8_t>(d >> s));
        count *= d;
    }
    if (count != tensor.data.size()) throw InvalidArgument("IDX dims do not match payload size");
    bytes.insert(bytes.end(), tensor.data.begin(), tensor.data.end());

    if (path.extension() == ".gz") {
        gzFile file = gzopen(path.string().c_str(), "wb");
        if (file == nullptr) throw DataError("cannot write " + path.string());
        const int wrote = gzwrite(file, bytes.data(), static_cast<unsigned>(bytes.size()));
        gzclose(file);
        if (wrote != static_cast<int>(bytes.size())) throw DataError("write failed: " + path.string());
        return;
    }
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed: " + path.string());
}

Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                 std::optional<int> num_classes) {
    const IdxTensor images = read_idx(images_path);
    const IdxTensor labels = read_idx(labels_path);
    if (images.dims.size() != 3) {
        throw DataError(images_path.string() + ": expected a 3-D image tensor (magic 0x00000803)");
    }
    if (labels.dims.size() != 1) {
        throw DataError(labels_path.string() + ": expected a label vector (magic 0x00000801)");
    }
    const std::size_t n = images.dims[0];
    if (labels.dims[0] != n) {
        throw DataError("length mismatch: " + std::to_string(n) + " images but " +
                        std::to_string(labels.dims[0]) + " labels");
    }
    const std::size_t l = std::size_t{images.dims[1]} * images.dims[2];
    std::vector<double> values(n * l);
    for (std::size_t t = 0; t < values.size(); ++t) values[t] = images.data[t] / 255.0;

    std::vector<int> y(labels.data.begin(), labels.data.end());
    int classes = num_classes.value_or(*std::max_element(y.begin(), y.end()) + 1);
    if (classes < 2) throw DataError(labels_path.string() + ": labels need at least two classes");
    std::vector<std::string> names;
    for (int c = 0; c < classes; ++c) names.push_back(std::to_string(c));
    try {
        return Dataset(FeatureMatrix(n, l, std::move(values)), LabelVector(std::move(y), classes),
                       std::move(names));
    } catch (const InvalidArgument& e) {
        throw DataError(labels_path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : text) {
        const auto u = static_cast<unsigned char>(ch);
        if (std::isalnum(u)) {
            current.push_back(static_cast<char>(std::tolower(u)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

TfidfResult build_tfidf(const std::vector<std::vector<std::string>>& documents,
                        std::size_t vocab_size) {
    if (documents.empty()) throw InvalidArgument("build_tfidf: empty corpus");
    std::map<std::string, std::pair<std::size_t, std::size_t>> stats;  // term -> (count, df)
    for (const auto& doc : documents) {
        std::map<std::string_view, bool> seen;
        for (const auto& token : doc) {
            auto& s = stats[token];
            ++s.first;
            if (!seen[token]) {
                seen[token] = true;
                ++s.second;
            }
        }
    }
    if (stats.empty() || vocab_size == 0) throw InvalidArgument("build_tfidf: empty vocabulary");

    // std::map iterates lexicographically, so a stable sort by count keeps
    // ties in lexicographic order.
    std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> ranked(stats.begin(),
                                                                                   stats.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second.first > b.second.first; });
    if (ranked.size() > vocab_size) ranked.resize(vocab_size);

    Vocabulary vocab;
    vocab.document_count = documents.size();
    for (auto& [term, s] : ranked) {
        vocab.terms.push_back(term);
        vocab.document_frequency.push_back(s.second);
    }
    FeatureMatrix features = transform_tfidf(documents, vocab);
    return {std::move(features), std::move(vocab)};
}

FeatureMatrix transform_tfidf(const std::vector<std::vector<std::string>>& documents,
                              const Vocabulary& vocabulary) {
    if (documents.empty()) throw InvalidArgument("transform_tfidf: no documents");
    const std::size_t v = vocabulary.terms.size();
    if (v == 0) throw InvalidArgument("transform_tfidf: empty vocabulary");
    std::unordered_map<std::string_view, std::size_t> index;
    std::vector<double> idf(v);
    const double n_docs = static_cast<double>(vocabulary.document_count);
    for (std::size_t t = 0; t < v; ++t) {
        index.emplace(vocabulary.terms[t], t);
        idf[t] = std::log((1.0 + n_docs) / (1.0 + static_cast<double>(vocabulary.document_frequency[t]))) + 1.0;
    }

    std::vector<double> values(documents.size() * v, 0.0);
    for (std::size_t d = 0; d < documents.size(); ++d) {
        double* row = values.data() + d * v;
        for (const auto& token : documents[d]) {
            if (auto it = index.find(token); it != index.end()) row[it->second] += 1.0;
        }
        double norm = 0.0;
        for (std::size_t t = 0; t < v; ++t) {
            row[t] *= idf[t];
            norm += row[t] * row[t];
        }
        if (norm > 0.0) {
            const double inv = 1.0 / std::sqrt(norm);
            for (std::size_t t = 0; t < v; ++t) row[t] *= inv;
        }
    }
    return FeatureMatrix(documents.size(), v, std::move(values));
}

TextCorpus load_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    TextCorpus corpus;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos) {
            throw DataError(path.string() + ": row " + std::to_string(row) + " has no tab after the label");
        }
        corpus.labels.emplace_back(trim(std::string_view(line).substr(0, tab)));
        corpus.documents.push_back(tokenize(std::string_view(line).substr(tab + 1)));
    }
    if (corpus.documents.empty()) throw DataError(path.string() + ": no records");
    return corpus;
}

}  // namespace dsl

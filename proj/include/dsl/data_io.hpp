#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dsl/core_data.hpp"

namespace dsl {

class DslModel;

// --- CSV -------------------------------------------------------------------

struct CsvOptions {
    /// Header name or 0-based column index of the label column. Empty means
    /// every column is a feature and the dataset is unlabeled.
    std::string label_column = "label";
    bool has_header = true;
    char delimiter = ',';
    /// When set, labels must be one of these names and map to their position.
    /// Otherwise classes are numbered by first appearance.
    std::optional<std::vector<std::string>> known_classes;
};

/// Throws DataError naming the 1-based file row and column of a bad cell.
Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});

/// Writes probabilities with a header of class names (or class indices).
void write_probabilities_csv(const std::filesystem::path& path, const ProbabilityMatrix& probs,
                             std::span<const std::string> class_names = {});

// --- IDX -------------------------------------------------------------------

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// Raw contents of an IDX unsigned-byte tensor.
struct IdxTensor {
    std::vector<std::uint32_t> dims;
    std::vector<std::uint8_t> data;
};

/// Reads an IDX file; gzip-compressed files are decompressed transparently.
IdxTensor read_idx(const std::filesystem::path& path);
/// Writes an IDX file; gzip-compressed when the path ends in ".gz".
void write_idx(const std::filesystem::path& path, const IdxTensor& tensor);

/// Images flattened row-major and scaled by 1/255, with their labels.
/// The class count is the largest label + 1 unless `num_classes` is given.
Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                 std::optional<int> num_classes = std::nullopt);

// --- Text / TF-IDF ---------------------------------------------------------

/// Lowercases and splits on every run of non-alphanumeric characters.
std::vector<std::string> tokenize(std::string_view text);

struct Vocabulary {
    /// Ordered by descending corpus count, ties lexicographically.
    std::vector<std::string> terms;
    std::vector<std::size_t> document_frequency;
    std::size_t document_count = 0;
};

struct TfidfResult {
    FeatureMatrix features;
    Vocabulary vocabulary;
};

/// Keeps the `vocab_size` most frequent tokens. Entry (d, t) is
/// count(t in d) * (ln((1 + N) / (1 + df(t))) + 1); rows are then
/// L2-normalized (all-zero rows stay zero).
TfidfResult build_tfidf(const std::vector<std::vector<std::string>>& documents,
                        std::size_t vocab_size = 2000);

/// Applies a fitted vocabulary (its document frequencies and count) to new documents.
FeatureMatrix transform_tfidf(const std::vector<std::vector<std::string>>& documents,
                              const Vocabulary& vocabulary);

struct TextCorpus {
    std::vector<std::vector<std::string>> documents;
    std::vector<std::string> labels;
};

/// One record per line: "<label>\t<text>".
TextCorpus load_text(const std::filesystem::path& path);

/// Maps label strings to class ids: by position in `known` when given,
/// otherwise by first appearance (appending to `names`).
std::vector<int> encode_labels(std::span<const std::string> labels, std::vector<std::string>& names,
                               bool extend);

// --- Model archive ---------------------------------------------------------

inline constexpr std::uint32_t kArchiveVersion = 1;

std::vector<std::uint8_t> serialize_model(const DslModel& model);
DslModel deserialize_model(std::span<const std::uint8_t> bytes);

void save_model(const DslModel& model, const std::filesystem::path& path);
DslModel load_model(const std::filesystem::path& path);

}  // namespace dsl

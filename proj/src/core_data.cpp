#include "dsl/core_data.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "dsl/error.hpp"

namespace dsl {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
    if (data_.size() != rows * cols) {
        throw DimensionError("matrix: " + std::to_string(data_.size()) + " values for a " +
                             std::to_string(rows) + "x" + std::to_string(cols) + " shape");
    }
}

// ---------------------------------------------------------------------------

FeatureMatrix::FeatureMatrix(Matrix values) : values_(std::move(values)) {
    if (values_.rows() == 0 || values_.cols() == 0) {
        throw InvalidArgument("feature matrix needs at least one row and one column");
    }
    const auto v = values_.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) {
            throw InvalidArgument("non-finite feature value at row " +
                                  std::to_string(i / values_.cols()) + ", column " +
                                  std::to_string(i % values_.cols()));
        }
    }
}

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : FeatureMatrix(Matrix(rows, cols, std::move(values))) {}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> indices) const {
    const std::size_t l = cols();
    std::vector<double> out(indices.size() * l);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= rows()) throw DimensionError("row index out of range");
        std::memcpy(out.data() + i * l, values_.row(indices[i]).data(), l * sizeof(double));
    }
    return FeatureMatrix(Matrix(indices.size(), l, std::move(out)));
}

// ---------------------------------------------------------------------------

LabelVector::LabelVector(std::vector<int> labels, int num_classes)
    : labels_(std::move(labels)), num_classes_(num_classes) {
    if (num_classes_ < 2) throw InvalidArgument("label vector needs at least two classes");
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] < 0 || labels_[i] >= num_classes_) {
            throw InvalidArgument("label " + std::to_string(labels_[i]) + " at record " +
                                  std::to_string(i) + " outside [0, " +
                                  std::to_string(num_classes_) + ")");
        }
    }
}

std::vector<std::size_t> LabelVector::class_counts() const {
    std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes_), 0);
    for (int y : labels_) ++counts[static_cast<std::size_t>(y)];
    return counts;
}

void LabelVector::require_all_classes_present() const {
    const auto counts = class_counts();
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] == 0) {
            throw InvalidArgument("class " + std::to_string(c) + " has no records");
        }
    }
}

LabelVector LabelVector::select(std::span<const std::size_t> indices) const {
    std::vector<int> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) {
        if (i >= labels_.size()) throw DimensionError("label index out of range");
        out.push_back(labels_[i]);
    }
    return LabelVector(std::move(out), num_classes_);
}

// ---------------------------------------------------------------------------

ProbabilityMatrix::ProbabilityMatrix(Matrix probs) : probs_(std::move(probs)) {
    if (probs_.cols() == 0) throw InvalidArgument("probability matrix needs at least one class");
    for (std::size_t r = 0; r < probs_.rows(); ++r) {
        double sum = 0.0;
        for (double p : probs_.row(r)) {
            if (!(p >= 0.0 && p <= 1.0 + kRowSumTolerance)) {
                throw InvalidArgument("probability " + std::to_string(p) + " outside [0, 1] in row " +
                                      std::to_string(r));
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > kRowSumTolerance) {
            throw InvalidArgument("probability row " + std::to_string(r) + " sums to " +
                                  std::to_string(sum));
        }
    }
}

ProbabilityMatrix::ProbabilityMatrix(std::size_t rows, std::size_t cols, std::vector<double> probs)
    : ProbabilityMatrix(Matrix(rows, cols, std::move(probs))) {}

ProbabilityMatrix ProbabilityMatrix::uniform(std::size_t rows, std::size_t cols) {
    return ProbabilityMatrix(Matrix(rows, cols, 1.0 / static_cast<double>(cols)));
}

// ---------------------------------------------------------------------------

Dataset::Dataset(FeatureMatrix x, std::optional<LabelVector> y, std::vector<std::string> names)
    : features(std::move(x)), labels(std::move(y)), class_names(std::move(names)) {
    if (labels && labels->size() != features.rows()) {
        throw DimensionError("dataset has " + std::to_string(features.rows()) + " feature rows but " +
                             std::to_string(labels->size()) + " labels");
    }
}

const LabelVector& Dataset::require_labels() const {
    if (!labels) throw InvalidArgument("dataset is unlabeled");
    return *labels;
}

Dataset Dataset::select_rows(std::span<const std::size_t> indices) const {
    std::optional<LabelVector> y;
    if (labels) y = labels->select(indices);
    return Dataset(features.select_rows(indices), std::move(y), class_names);
}

// ---------------------------------------------------------------------------

FeatureMatrix augment_features(const FeatureMatrix& original, const ProbabilityMatrix& probs) {
    if (original.rows() != probs.rows()) {
        throw DimensionError("augment_features: " + std::to_string(original.rows()) +
                             " feature rows vs " + std::to_string(probs.rows()) + " probability rows");
    }
    const std::size_t n = original.rows();
    const std::size_t l = original.cols();
    const std::size_t j = probs.cols();
    std::vector<double> out(n * (l + j));
    for (std::size_t i = 0; i < n; ++i) {
        double* dst = out.data() + i * (l + j);
        std::memcpy(dst, original.row(i).data(), l * sizeof(double));
        std::memcpy(dst + l, probs.row(i).data(), j * sizeof(double));
    }
    return FeatureMatrix(Matrix(n, l + j, std::move(out)));
}

}  // namespace dsl

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dsl {

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const noexcept {
        return {data_.data() + r * cols_, cols_};
    }
    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }

    std::span<const double> values() const noexcept { return data_; }
    std::span<double> values() noexcept { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// n records by l features. All values finite, n >= 1, l >= 1.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    explicit FeatureMatrix(Matrix values);
    FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    std::size_t rows() const noexcept { return values_.rows(); }
    std::size_t cols() const noexcept { return values_.cols(); }
    double operator()(std::size_t r, std::size_t c) const noexcept { return values_(r, c); }
    std::span<const double> row(std::size_t r) const noexcept { return values_.row(r); }
    const Matrix& matrix() const noexcept { return values_; }

    /// Copy of the listed rows, in the listed order.
    FeatureMatrix select_rows(std::span<const std::size_t> indices) const;

    bool operator==(const FeatureMatrix&) const = default;

private:
    Matrix values_;
};

/// Integer class labels in [0, num_classes), num_classes >= 2.
class LabelVector {
public:
    LabelVector() = default;
    LabelVector(std::vector<int> labels, int num_classes);

    std::size_t size() const noexcept { return labels_.size(); }
    int num_classes() const noexcept { return num_classes_; }
    int operator[](std::size_t i) const noexcept { return labels_[i]; }
    std::span<const int> values() const noexcept { return labels_; }

    /// Per-class record counts.
    std::vector<std::size_t> class_counts() const;
    /// Throws InvalidArgument unless every class in [0, num_classes) occurs.
    void require_all_classes_present() const;

    LabelVector select(std::span<const std::size_t> indices) const;

    bool operator==(const LabelVector&) const = default;

private:
    std::vector<int> labels_;
    int num_classes_ = 0;
};

/// n records by j classes; every row lies on the probability simplex.
class ProbabilityMatrix {
public:
    static constexpr double kRowSumTolerance = 1e-9;

    ProbabilityMatrix() = default;
    /// Validates entries in [0, 1] and row sums within kRowSumTolerance.
    explicit ProbabilityMatrix(Matrix probs);
    ProbabilityMatrix(std::size_t rows, std::size_t cols, std::vector<double> probs);

    /// Every row equal to 1/cols.
    static ProbabilityMatrix uniform(std::size_t rows, std::size_t cols);

    std::size_t rows() const noexcept { return probs_.rows(); }
    std::size_t cols() const noexcept { return probs_.cols(); }
    double operator()(std::size_t r, std::size_t c) const noexcept { return probs_(r, c); }
    std::span<const double> row(std::size_t r) const noexcept { return probs_.row(r); }
    const Matrix& matrix() const noexcept { return probs_; }

    bool operator==(const ProbabilityMatrix&) const = default;

private:
    Matrix probs_;
};

/// Features plus optional labels (absent for unlabeled prediction inputs).
struct Dataset {
    FeatureMatrix features;
    std::optional<LabelVector> labels;
    /// Original class identifiers, indexed by class id, when known.
    std::vector<std::string> class_names;

    Dataset() = default;
    Dataset(FeatureMatrix x, std::optional<LabelVector> y, std::vector<std::string> names = {});

    std::size_t size() const noexcept { return features.rows(); }
    bool labeled() const noexcept { return labels.has_value(); }
    const LabelVector& require_labels() const;

    Dataset select_rows(std::span<const std::size_t> indices) const;
};

/// Returns [original | probs], n x (l + j). Callers pass the unaugmented
/// feature set so the width stays l + j across cascade layers.
FeatureMatrix augment_features(const FeatureMatrix& original, const ProbabilityMatrix& probs);

}  // namespace dsl

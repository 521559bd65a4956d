#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "dsl/core_data.hpp"

namespace dsl {

class ArchiveWriter;

enum class LearnerKind : std::uint8_t {
    logistic_regression = 0,
    knn = 1,
    random_forest = 2,
    extra_trees = 3,
    gradient_boosted_trees = 4,
    dummy_uniform = 5,
    dummy_prior = 6,
};

/// Multinomial softmax regression trained by full-batch gradient descent on
/// standardized features.
struct LogisticRegressionParams {
    double learning_rate = 0.1;
    double l2_penalty = 1e-4;
    std::size_t max_epochs = 500;
    double gradient_tolerance = 1e-6;
    bool operator==(const LogisticRegressionParams&) const = default;
};

struct KnnParams {
    std::size_t neighbors = 11;
    bool operator==(const KnnParams&) const = default;
};

/// Shared by random forests and extremely randomized trees.
struct ForestParams {
    std::size_t trees = 200;
    std::size_t max_depth = 0;  ///< 0 = unlimited
    std::size_t max_features = 0;  ///< 0 = ceil(sqrt(feature count))
    std::size_t min_samples_split = 2;
    std::size_t max_bins = 256;  ///< random forest split search only
    bool operator==(const ForestParams&) const = default;
};

/// Softmax gradient boosting with one regression tree per class per round.
struct BoostingParams {
    std::size_t rounds = 200;
    std::size_t max_depth = 3;
    double learning_rate = 1.0;
    double l2_leaf = 1.0;
    double min_child_weight = 1.0;
    std::size_t max_bins = 256;
    bool operator==(const BoostingParams&) const = default;
};

struct NoParams {
    bool operator==(const NoParams&) const = default;
};

using HyperParams =
    std::variant<NoParams, LogisticRegressionParams, KnnParams, ForestParams, BoostingParams>;

struct LearnerSpec {
    LearnerKind kind = LearnerKind::dummy_uniform;
    HyperParams params;
    std::uint64_t seed = 0;

    /// Defaults for `kind` (200 trees, 11 neighbors, depth 3, learning rate 1, ...).
    static LearnerSpec defaults(LearnerKind kind, std::uint64_t seed = 0);

    /// Throws InvalidArgument on a kind/params mismatch or out-of-range values.
    void validate() const;

    bool operator==(const LearnerSpec&) const = default;
};

std::string_view learner_name(LearnerKind kind) noexcept;
/// lr, knn, rf, et, gbt, uniform, prior
std::string_view learner_short_name(LearnerKind kind) noexcept;
/// Accepts either the full or the short name.
std::optional<LearnerKind> parse_learner_kind(std::string_view name) noexcept;

/// Logistic regression, k-NN, random forest, extra trees, gradient boosting.
std::vector<LearnerSpec> default_roster();

/// A fitted learner. Implementations are immutable after construction.
class Classifier {
public:
    virtual ~Classifier() = default;
    /// Writes class probabilities of `features` into `out` (rows x classes).
    virtual void predict_into(const FeatureMatrix& features, Matrix& out) const = 0;
    /// Kind-specific parameter block for the model archive.
    virtual void write(ArchiveWriter& out) const = 0;
};

class TrainedModel {
public:
    TrainedModel(LearnerSpec spec, std::shared_ptr<const Classifier> impl, int num_classes,
                 std::size_t feature_count);

    const LearnerSpec& spec() const noexcept { return spec_; }
    int num_classes() const noexcept { return num_classes_; }
    std::size_t feature_count() const noexcept { return feature_count_; }
    const Classifier& impl() const noexcept { return *impl_; }

    /// Throws DimensionError when the column count differs from feature_count().
    ProbabilityMatrix predict_proba(const FeatureMatrix& features) const;

private:
    LearnerSpec spec_;
    std::shared_ptr<const Classifier> impl_;
    int num_classes_;
    std::size_t feature_count_;
};

/// Fits `spec` to the data. Deterministic given (spec, seed, data).
/// Throws TrainingError for single-class data or too few records.
TrainedModel fit(const LearnerSpec& spec, const FeatureMatrix& features, const LabelVector& labels);

inline ProbabilityMatrix predict_proba(const TrainedModel& model, const FeatureMatrix& features) {
    return model.predict_proba(features);
}

}  // namespace dsl

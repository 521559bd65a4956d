#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dsl/core_data.hpp"
#include "dsl/learners.hpp"
#include "dsl/metrics.hpp"
#include "dsl/weight_optimizer.hpp"

namespace dsl {

enum class EnsembleMode : std::uint8_t {
    deep = 0,            ///< layers until the optimized loss stops decreasing
    single_layer = 1,    ///< one layer with optimized weights (classic super learner)
    simple_average = 2,  ///< one layer with weights fixed at 1/m
};

std::string_view mode_name(EnsembleMode mode) noexcept;
std::optional<EnsembleMode> parse_mode(std::string_view name) noexcept;

struct TrainConfig {
    std::size_t folds = 3;
    std::vector<LearnerSpec> roster = default_roster();
    std::size_t max_iterations = 20;
    /// Also fit every learner on the full training set and use those models
    /// at prediction time instead of the fold models.
    bool retrain_full = false;
    std::uint64_t seed = 0;
    EnsembleMode mode = EnsembleMode::deep;
    /// Task-pool size. Results do not depend on it.
    std::size_t workers = 1;

    void validate() const;
};

/// One cascade layer.
struct LayerModel {
    /// models[q] holds learner q's k fold models, or its one full-data model
    /// when trained with retrain_full.
    std::vector<std::vector<TrainedModel>> models;
    WeightVector weights;
    /// Optimized out-of-fold log loss of this layer.
    double train_loss = 0.0;
    std::uint64_t fold_assignment_seed = 0;
};

class DslModel {
public:
    /// Throws InvalidArgument when layers are empty, shapes disagree, or the
    /// training losses are not strictly decreasing.
    DslModel(std::vector<LayerModel> layers, int num_classes, std::size_t feature_count,
             TrainConfig config, std::vector<std::string> class_names = {});

    const std::vector<LayerModel>& layers() const noexcept { return layers_; }
    std::size_t depth() const noexcept { return layers_.size(); }
    int num_classes() const noexcept { return num_classes_; }
    /// Width of the original (unaugmented) features.
    std::size_t feature_count() const noexcept { return feature_count_; }
    const TrainConfig& config() const noexcept { return config_; }
    const std::vector<std::string>& class_names() const noexcept { return class_names_; }

    /// The first `count` layers as a model of their own.
    DslModel truncated(std::size_t count) const;

private:
    std::vector<LayerModel> layers_;
    int num_classes_;
    std::size_t feature_count_;
    TrainConfig config_;
    std::vector<std::string> class_names_;
};

/// Diagnostics of one training iteration, kept or discarded.
struct IterationReport {
    std::size_t iteration = 0;  ///< 1-based
    double loss = 0.0;          ///< optimized (or, in simple_average mode, uniform) OOF loss
    double uniform_loss = 0.0;  ///< OOF loss with weights 1/m
    std::vector<double> learner_losses;  ///< per-learner OOF log loss
    std::vector<double> weights;
    bool kept = false;
    double seconds = 0.0;
};

struct TrainReport {
    std::vector<IterationReport> iterations;
};

using ProgressCallback = std::function<void(const IterationReport&)>;

/// Layered training loop. Each iteration draws fresh stratified folds,
/// collects out-of-fold predictions of every learner, optimizes the
/// combination weights and keeps the layer only if its loss is below the
/// previous layer's. The next layer sees the original features with the
/// combined probabilities appended (width l + j throughout).
DslModel train(const Dataset& dataset, const TrainConfig& config, TrainReport* report = nullptr,
               const ProgressCallback& progress = {});

/// Combined probabilities after every layer: result[t] is the output of the
/// cascade truncated to t + 1 layers.
std::vector<ProbabilityMatrix> predict_layers(const DslModel& model, const FeatureMatrix& features,
                                              std::size_t workers = 1);

/// Output of the full cascade.
ProbabilityMatrix predict(const DslModel& model, const FeatureMatrix& features,
                          std::size_t workers = 1);

/// Metrics of the cascade truncated at each layer 1..T.
std::vector<MetricsRecord> evaluate(const DslModel& model, const Dataset& dataset,
                                    std::size_t workers = 1);

/// Per-learner predictions of one layer (fold-model average, or the full
/// model), for inputs already augmented to that layer's width.
StackedPredictions layer_learner_predictions(const LayerModel& layer, const FeatureMatrix& input,
                                             std::size_t workers = 1);

/// The first layer of `model` with weights fixed at 1/m. With the same
/// config and seed this equals training in simple_average mode, because
/// first-layer folds and fits do not depend on the weights.
DslModel simple_average_from(const DslModel& model, double uniform_train_loss);

}  // namespace dsl

#include "dsl/deep_ensemble.hpp"

#include <chrono>
#include <optional>
#include <string>

#include "dsl/cross_validation.hpp"
#include "dsl/error.hpp"
#include "dsl/parallel.hpp"
#include "dsl/random.hpp"

namespace dsl {

std::string_view mode_name(EnsembleMode mode) noexcept {
    switch (mode) {
        case EnsembleMode::deep: return "deep";
        case EnsembleMode::single_layer: return "single_layer";
        case EnsembleMode::simple_average: return "simple_average";
    }
    return "unknown";
}

std::optional<EnsembleMode> parse_mode(std::string_view name) noexcept {
    for (auto m : {EnsembleMode::deep, EnsembleMode::single_layer, EnsembleMode::simple_average}) {
        if (name == mode_name(m)) return m;
    }
    if (name == "single-layer") return EnsembleMode::single_layer;
    if (name == "simple-average") return EnsembleMode::simple_average;
    return std::nullopt;
}

void TrainConfig::validate() const {
    if (folds < 2) throw InvalidArgument("fold count must be >= 2");
    if (max_iterations < 1) throw InvalidArgument("max_iterations must be >= 1");
    if (roster.empty()) throw InvalidArgument("learner roster is empty");
    for (const auto& spec : roster) spec.validate();
}

// ---------------------------------------------------------------------------

DslModel::DslModel(std::vector<LayerModel> layers, int num_classes, std::size_t feature_count,
                   TrainConfig config, std::vector<std::string> class_names)
    : layers_(std::move(layers)), num_classes_(num_classes), feature_count_(feature_count),
      config_(std::move(config)), class_names_(std::move(class_names)) {
    if (layers_.empty()) throw InvalidArgument("model has no layers");
    if (num_classes_ < 2) throw InvalidArgument("model needs at least two classes");
    const std::size_t m = config_.roster.size();
    const std::size_t augmented = feature_count_ + static_cast<std::size_t>(num_classes_);
    for (std::size_t t = 0; t < layers_.size(); ++t) {
        const LayerModel& layer = layers_[t];
        if (layer.models.size() != m || layer.weights.size() != m) {
            throw InvalidArgument("layer " + std::to_string(t + 1) + " does not match the roster size");
        }
        const std::size_t width = t == 0 ? feature_count_ : augmented;
        for (const auto& per_learner : layer.models) {
            if (per_learner.empty()) throw InvalidArgument("layer has a learner without models");
            for (const auto& model : per_learner) {
                if (model.feature_count() != width || model.num_classes() != num_classes_) {
                    throw InvalidArgument("layer " + std::to_string(t + 1) +
                                          " model shape disagrees with the cascade");
                }
            }
        }
        if (t > 0 && !(layer.train_loss < layers_[t - 1].train_loss)) {
            throw InvalidArgument("training loss must strictly decrease across layers");
        }
    }
}

DslModel DslModel::truncated(std::size_t count) const {
    if (count == 0 || count > layers_.size()) throw InvalidArgument("truncation depth out of range");
    return DslModel(std::vector<LayerModel>(layers_.begin(), layers_.begin() + static_cast<std::ptrdiff_t>(count)),
                    num_classes_, feature_count_, config_, class_names_);
}

// ---------------------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

struct FitTask {
    std::size_t learner;
    std::size_t fold;  ///< == k for a full-data fit
};

}  // namespace

DslModel train(const Dataset& dataset, const TrainConfig& config, TrainReport* report,
               const ProgressCallback& progress) {
    config.validate();
    const LabelVector& labels = dataset.require_labels();
    labels.require_all_classes_present();
    const std::size_t k = config.folds;
    const std::size_t m = config.roster.size();
    const auto j = static_cast<std::size_t>(labels.num_classes());
    const std::size_t max_iterations =
        config.mode == EnsembleMode::deep ? config.max_iterations : 1;

    std::vector<LayerModel> layers;
    double previous_loss = std::numeric_limits<double>::infinity();
    Dataset input(dataset.features, labels);

    for (std::size_t it = 0; it < max_iterations; ++it) {
        const auto started = Clock::now();
        const std::uint64_t fold_seed = derive_seed({config.seed, it});
        const FoldAssignment folds = stratified_folds(labels, k, fold_seed);

        std::vector<FitTask> tasks;
        for (std::size_t q = 0; q < m; ++q) {
            for (std::size_t f = 0; f < k; ++f) tasks.push_back({q, f});
        }
        std::vector<std::optional<FoldFit>> fits(tasks.size());
        parallel_for(tasks.size(), config.workers, [&](std::size_t t) {
            LearnerSpec spec = config.roster[tasks[t].learner];
            spec.seed = derive_seed({config.seed, it, tasks[t].fold, tasks[t].learner});
            fits[t] = fit_fold(spec, input, folds, tasks[t].fold);
        });

        std::vector<ProbabilityMatrix> oof;
        std::vector<std::vector<TrainedModel>> models(m);
        for (std::size_t q = 0; q < m; ++q) {
            std::vector<FoldFit> per_learner;
            for (std::size_t f = 0; f < k; ++f) per_learner.push_back(std::move(*fits[q * k + f]));
            oof.push_back(assemble_out_of_fold(per_learner, input.size(), j));
            for (auto& fit : per_learner) models[q].push_back(std::move(fit.model));
        }
        const StackedPredictions stacked(std::move(oof));

        IterationReport iteration;
        iteration.iteration = it + 1;
        for (std::size_t q = 0; q < m; ++q) iteration.learner_losses.push_back(log_loss(stacked[q], labels));
        const WeightVector uniform = WeightVector::uniform(m);
        iteration.uniform_loss = log_loss(combine(stacked, uniform), labels);

        WeightFit weights;
        if (config.mode == EnsembleMode::simple_average) {
            weights = {uniform, iteration.uniform_loss, 0};
        } else {
            weights = optimize_weights(stacked, labels);
        }
        iteration.loss = weights.loss;
        iteration.weights.assign(weights.weights.values().begin(), weights.weights.values().end());
        iteration.kept = weights.loss < previous_loss;

        if (iteration.kept && config.retrain_full) {
            std::vector<std::optional<TrainedModel>> full(m);
            parallel_for(m, config.workers, [&](std::size_t q) {
                LearnerSpec spec = config.roster[q];
                spec.seed = derive_seed({config.seed, it, k, q});
                full[q] = fit(spec, input.features, labels);
            });
            for (std::size_t q = 0; q < m; ++q) models[q] = {std::move(*full[q])};
        }

        iteration.seconds = std::chrono::duration<double>(Clock::now() - started).count();
        if (report) report->iterations.push_back(iteration);
        if (progress) progress(iteration);
        if (!iteration.kept) break;

        const ProbabilityMatrix combined = combine(stacked, weights.weights);
        layers.push_back({std::move(models), weights.weights, weights.loss, fold_seed});
        previous_loss = weights.loss;
        input = Dataset(augment_features(dataset.features, combined), labels);
    }

    return DslModel(std::move(layers), labels.num_classes(), dataset.features.cols(), config,
                    dataset.class_names);
}

StackedPredictions layer_learner_predictions(const LayerModel& layer, const FeatureMatrix& input,
                                             std::size_t workers) {
    std::vector<std::pair<std::size_t, std::size_t>> tasks;
    for (std::size_t q = 0; q < layer.models.size(); ++q) {
        for (std::size_t f = 0; f < layer.models[q].size(); ++f) tasks.emplace_back(q, f);
    }
    std::vector<std::optional<ProbabilityMatrix>> outputs(tasks.size());
    parallel_for(tasks.size(), workers, [&](std::size_t t) {
        outputs[t] = layer.models[tasks[t].first][tasks[t].second].predict_proba(input);
    });

    std::vector<ProbabilityMatrix> per_learner;
    std::size_t t = 0;
    for (std::size_t q = 0; q < layer.models.size(); ++q) {
        const std::size_t count = layer.models[q].size();
        if (count == 1) {
            per_learner.push_back(std::move(*outputs[t++]));
            continue;
        }
        // Fold-model average, summed in fold order.
        Matrix mean(input.rows(), outputs[t]->cols(), 0.0);
        auto dst = mean.values();
        for (std::size_t f = 0; f < count; ++f, ++t) {
            const auto src = outputs[t]->matrix().values();
            for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
        }
        for (double& v : dst) v /= static_cast<double>(count);
        per_learner.emplace_back(std::move(mean));
    }
    return StackedPredictions(std::move(per_learner));
}

std::vector<ProbabilityMatrix> predict_layers(const DslModel& model, const FeatureMatrix& features,
                                              std::size_t workers) {
    if (features.cols() != model.feature_count()) {
        throw DimensionError("model expects " + std::to_string(model.feature_count()) +
                             " features, got " + std::to_string(features.cols()));
    }
    std::vector<ProbabilityMatrix> outputs;
    FeatureMatrix input = features;
    for (std::size_t t = 0; t < model.depth(); ++t) {
        const LayerModel& layer = model.layers()[t];
        outputs.push_back(combine(layer_learner_predictions(layer, input, workers), layer.weights));
        if (t + 1 < model.depth()) input = augment_features(features, outputs.back());
    }
    return outputs;
}

ProbabilityMatrix predict(const DslModel& model, const FeatureMatrix& features, std::size_t workers) {
    auto outputs = predict_layers(model, features, workers);
    return std::move(outputs.back());
}

std::vector<MetricsRecord> evaluate(const DslModel& model, const Dataset& dataset,
                                    std::size_t workers) {
    const LabelVector& labels = dataset.require_labels();
    std::vector<MetricsRecord> records;
    for (const auto& probs : predict_layers(model, dataset.features, workers)) {
        records.push_back(evaluate_metrics(probs, labels));
    }
    return records;
}

DslModel simple_average_from(const DslModel& model, double uniform_train_loss) {
    LayerModel first = model.layers().front();
    first.weights = WeightVector::uniform(first.models.size());
    first.train_loss = uniform_train_loss;
    TrainConfig config = model.config();
    config.mode = EnsembleMode::simple_average;
    return DslModel({std::move(first)}, model.num_classes(), model.feature_count(), config,
                    model.class_names());
}

}  // namespace dsl

#include "dsl/learners.hpp"

#include <cmath>
#include <string>

#include "dsl/error.hpp"
#include "dsl/learners/dummy.hpp"
#include "dsl/learners/forest.hpp"
#include "dsl/learners/gradient_boosting.hpp"
#include "dsl/learners/knn.hpp"
#include "dsl/learners/logistic_regression.hpp"

namespace dsl {

namespace {

template <typename P>
const P& params_as(const LearnerSpec& spec) {
    const P* p = std::get_if<P>(&spec.params);
    if (p == nullptr) {
        throw InvalidArgument(std::string("hyper-parameters do not match learner kind ") +
                              std::string(learner_name(spec.kind)));
    }
    return *p;
}

}  // namespace

LearnerSpec LearnerSpec::defaults(LearnerKind kind, std::uint64_t seed) {
    LearnerSpec spec;
    spec.kind = kind;
    spec.seed = seed;
    switch (kind) {
        case LearnerKind::logistic_regression: spec.params = LogisticRegressionParams{}; break;
        case LearnerKind::knn: spec.params = KnnParams{}; break;
        case LearnerKind::random_forest: spec.params = ForestParams{}; break;
        case LearnerKind::extra_trees: {
            ForestParams p;
            p.max_features = 1;
            spec.params = p;
            break;
        }
        case LearnerKind::gradient_boosted_trees: spec.params = BoostingParams{}; break;
        case LearnerKind::dummy_uniform:
        case LearnerKind::dummy_prior: spec.params = NoParams{}; break;
    }
    return spec;
}

void LearnerSpec::validate() const {
    switch (kind) {
        case LearnerKind::logistic_regression: {
            const auto& p = params_as<LogisticRegressionParams>(*this);
            if (!(p.learning_rate > 0.0)) throw InvalidArgument("learning rate must be > 0");
            if (!(p.l2_penalty >= 0.0)) throw InvalidArgument("L2 penalty must be >= 0");
            if (p.max_epochs == 0) throw InvalidArgument("max epochs must be >= 1");
            break;
        }
        case LearnerKind::knn:
            if (params_as<KnnParams>(*this).neighbors == 0) throw InvalidArgument("neighbors must be >= 1");
            break;
        case LearnerKind::random_forest:
        case LearnerKind::extra_trees: {
            const auto& p = params_as<ForestParams>(*this);
            if (p.trees == 0) throw InvalidArgument("trees must be >= 1");
            if (p.min_samples_split < 2) throw InvalidArgument("min_samples_split must be >= 2");
            if (p.max_bins < 2 || p.max_bins > 256) throw InvalidArgument("max_bins must be in [2, 256]");
            break;
        }
        case LearnerKind::gradient_boosted_trees: {
            const auto& p = params_as<BoostingParams>(*this);
            if (p.rounds == 0) throw InvalidArgument("boosting rounds must be >= 1");
            if (p.max_depth == 0) throw InvalidArgument("boosting depth must be >= 1");
            if (!(p.learning_rate > 0.0)) throw InvalidArgument("learning rate must be > 0");
            if (!(p.l2_leaf >= 0.0) || !(p.min_child_weight >= 0.0)) {
                throw InvalidArgument("boosting regularization must be >= 0");
            }
            if (p.max_bins < 2 || p.max_bins > 256) throw InvalidArgument("max_bins must be in [2, 256]");
            break;
        }
        case LearnerKind::dummy_uniform:
        case LearnerKind::dummy_prior: params_as<NoParams>(*this); break;
        default: throw InvalidArgument("unknown learner kind");
    }
}

std::string_view learner_name(LearnerKind kind) noexcept {
    switch (kind) {
        case LearnerKind::logistic_regression: return "logistic_regression";
        case LearnerKind::knn: return "knn";
        case LearnerKind::random_forest: return "random_forest";
        case LearnerKind::extra_trees: return "extra_trees";
        case LearnerKind::gradient_boosted_trees: return "gradient_boosted_trees";
        case LearnerKind::dummy_uniform: return "dummy_uniform";
        case LearnerKind::dummy_prior: return "dummy_prior";
    }
    return "unknown";
}

std::string_view learner_short_name(LearnerKind kind) noexcept {
    switch (kind) {
        case LearnerKind::logistic_regression: return "lr";
        case LearnerKind::knn: return "knn";
        case LearnerKind::random_forest: return "rf";
        case LearnerKind::extra_trees: return "et";
        case LearnerKind::gradient_boosted_trees: return "gbt";
        case LearnerKind::dummy_uniform: return "uniform";
        case LearnerKind::dummy_prior: return "prior";
    }
    return "unknown";
}

std::optional<LearnerKind> parse_learner_kind(std::string_view name) noexcept {
    for (int k = 0; k <= static_cast<int>(LearnerKind::dummy_prior); ++k) {
        const auto kind = static_cast<LearnerKind>(k);
        if (name == learner_name(kind) || name == learner_short_name(kind)) return kind;
    }
    return std::nullopt;
}

std::vector<LearnerSpec> default_roster() {
    return {
        LearnerSpec::defaults(LearnerKind::logistic_regression),
        LearnerSpec::defaults(LearnerKind::knn),
        LearnerSpec::defaults(LearnerKind::random_forest),
        LearnerSpec::defaults(LearnerKind::extra_trees),
        LearnerSpec::defaults(LearnerKind::gradient_boosted_trees),
    };
}

// ---------------------------------------------------------------------------

TrainedModel::TrainedModel(LearnerSpec spec, std::shared_ptr<const Classifier> impl,
                           int num_classes, std::size_t feature_count)
    : spec_(std::move(spec)), impl_(std::move(impl)), num_classes_(num_classes),
      feature_count_(feature_count) {
    if (!impl_) throw InvalidArgument("trained model has no implementation");
}

ProbabilityMatrix TrainedModel::predict_proba(const FeatureMatrix& features) const {
    if (features.cols() != feature_count_) {
        throw DimensionError(std::string(learner_name(spec_.kind)) + " model expects " +
                             std::to_string(feature_count_) + " features, got " +
                             std::to_string(features.cols()));
    }
    Matrix out(features.rows(), static_cast<std::size_t>(num_classes_), 0.0);
    impl_->predict_into(features, out);
    return ProbabilityMatrix(std::move(out));
}

TrainedModel fit(const LearnerSpec& spec, const FeatureMatrix& features, const LabelVector& labels) {
    spec.validate();
    if (features.rows() != labels.size()) {
        throw DimensionError("fit: " + std::to_string(features.rows()) + " rows vs " +
                             std::to_string(labels.size()) + " labels");
    }
    const auto counts = labels.class_counts();
    std::size_t present = 0;
    for (std::size_t c : counts) present += c > 0 ? 1 : 0;
    if (present < 2) throw TrainingError("training data must contain at least two classes");

    std::shared_ptr<const Classifier> impl;
    switch (spec.kind) {
        case LearnerKind::logistic_regression:
            impl = LogisticRegression::train(std::get<LogisticRegressionParams>(spec.params), features,
                                             labels);
            break;
        case LearnerKind::knn:
            impl = KNearestNeighbors::train(std::get<KnnParams>(spec.params), features, labels);
            break;
        case LearnerKind::random_forest:
            impl = ForestClassifier::train_random_forest(std::get<ForestParams>(spec.params), spec.seed,
                                                         features, labels);
            break;
        case LearnerKind::extra_trees:
            impl = ForestClassifier::train_extra_trees(std::get<ForestParams>(spec.params), spec.seed,
                                                       features, labels);
            break;
        case LearnerKind::gradient_boosted_trees:
            impl = GradientBoostedTrees::train(std::get<BoostingParams>(spec.params), features, labels);
            break;
        case LearnerKind::dummy_uniform: impl = ConstantClassifier::uniform(labels.num_classes()); break;
        case LearnerKind::dummy_prior: impl = ConstantClassifier::prior(labels); break;
    }
    return TrainedModel(spec, std::move(impl), labels.num_classes(), features.cols());
}

}  // namespace dsl

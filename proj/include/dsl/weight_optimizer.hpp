#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dsl/core_data.hpp"

namespace dsl {

/// Nonnegative weights summing to 1 within 1e-9.
class WeightVector {
public:
    static constexpr double kSumTolerance = 1e-9;

    WeightVector() = default;
    explicit WeightVector(std::vector<double> weights);

    static WeightVector uniform(std::size_t m);
    static WeightVector vertex(std::size_t m, std::size_t q);

    std::size_t size() const noexcept { return weights_.size(); }
    double operator[](std::size_t q) const noexcept { return weights_[q]; }
    std::span<const double> values() const noexcept { return weights_; }

    bool operator==(const WeightVector&) const = default;

private:
    std::vector<double> weights_;
};

/// Out-of-fold (or test-time) probabilities of m learners over the same records.
class StackedPredictions {
public:
    StackedPredictions() = default;
    explicit StackedPredictions(std::vector<ProbabilityMatrix> per_learner);

    std::size_t learners() const noexcept { return per_learner_.size(); }
    std::size_t rows() const noexcept { return per_learner_.empty() ? 0 : per_learner_[0].rows(); }
    std::size_t classes() const noexcept { return per_learner_.empty() ? 0 : per_learner_[0].cols(); }
    const ProbabilityMatrix& operator[](std::size_t q) const noexcept { return per_learner_[q]; }

private:
    std::vector<ProbabilityMatrix> per_learner_;
};

/// output[i][c] = sum_q w[q] * stacked[q][i][c].
ProbabilityMatrix combine(const StackedPredictions& stacked, const WeightVector& weights);

struct WeightOptimizerOptions {
    double step_size = 1.0;
    double tolerance = 1e-8;
    std::size_t max_iterations = 1000;
};

struct WeightFit {
    WeightVector weights;
    /// log_loss(combine(stacked, weights), labels)
    double loss = 0.0;
    std::size_t iterations = 0;
};

/// Minimizes multiclass log loss of the combined predictions over the
/// probability simplex with exponentiated-gradient descent, started from
/// uniform weights. A step that raises the loss is rejected and the step
/// size halved. The result is never worse than the best single learner.
WeightFit optimize_weights(const StackedPredictions& stacked, const LabelVector& labels,
                           const WeightOptimizerOptions& options = {});

}  // namespace dsl

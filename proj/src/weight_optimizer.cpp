#include "dsl/weight_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dsl/error.hpp"
#include "dsl/metrics.hpp"
#include "dsl/simd/kernels.hpp"

namespace dsl {

WeightVector::WeightVector(std::vector<double> weights) : weights_(std::move(weights)) {
    if (weights_.empty()) throw InvalidArgument("weight vector is empty");
    double sum = 0.0;
    for (double w : weights_) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw InvalidArgument("weight " + std::to_string(w) + " is negative or non-finite");
        }
        sum += w;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
        throw InvalidArgument("weights sum to " + std::to_string(sum) + ", not 1");
    }
}

WeightVector WeightVector::uniform(std::size_t m) {
    return WeightVector(std::vector<double>(m, 1.0 / static_cast<double>(m)));
}

WeightVector WeightVector::vertex(std::size_t m, std::size_t q) {
    std::vector<double> w(m, 0.0);
    w.at(q) = 1.0;
    return WeightVector(std::move(w));
}

StackedPredictions::StackedPredictions(std::vector<ProbabilityMatrix> per_learner)
    : per_learner_(std::move(per_learner)) {
    for (const auto& p : per_learner_) {
        if (p.rows() != per_learner_[0].rows() || p.cols() != per_learner_[0].cols()) {
            throw DimensionError("stacked predictions have mismatched shapes");
        }
    }
}

ProbabilityMatrix combine(const StackedPredictions& stacked, const WeightVector& weights) {
    if (stacked.learners() == 0) throw InvalidArgument("combine: no learners");
    if (weights.size() != stacked.learners()) {
        throw DimensionError("combine: " + std::to_string(weights.size()) + " weights for " +
                             std::to_string(stacked.learners()) + " learners");
    }
    const auto& k = simd::kernels();
    Matrix out(stacked.rows(), stacked.classes(), 0.0);
    auto dst = out.values();
    for (std::size_t q = 0; q < stacked.learners(); ++q) {
        if (weights[q] == 0.0) continue;
        const auto src = stacked[q].matrix().values();
        k.axpy(weights[q], src.data(), dst.data(), dst.size());
    }
    return ProbabilityMatrix(std::move(out));
}

namespace {

// Only the true-class column matters to the objective: true_probs[q * n + i]
// is learner q's probability for record i's label.
class TrueClassObjective {
public:
    TrueClassObjective(const StackedPredictions& stacked, const LabelVector& labels)
        : m_(stacked.learners()), n_(stacked.rows()), true_probs_(m_ * n_), mixed_(n_) {
        for (std::size_t q = 0; q < m_; ++q) {
            for (std::size_t i = 0; i < n_; ++i) {
                true_probs_[q * n_ + i] = stacked[q](i, static_cast<std::size_t>(labels[i]));
            }
        }
    }

    double loss(std::span<const double> w) {
        mix(w);
        double total = 0.0;
        for (std::size_t i = 0; i < n_; ++i) total -= std::log(clip_probability(mixed_[i]));
        return total / static_cast<double>(n_);
    }

    // Gradient at the weights of the most recent loss() call.
    void gradient(std::span<double> grad) const {
        for (std::size_t q = 0; q < m_; ++q) {
            const double* a = true_probs_.data() + q * n_;
            double s = 0.0;
            for (std::size_t i = 0; i < n_; ++i) s += a[i] / clip_probability(mixed_[i]);
            grad[q] = -s / static_cast<double>(n_);
        }
    }

private:
    void mix(std::span<const double> w) {
        std::fill(mixed_.begin(), mixed_.end(), 0.0);
        for (std::size_t q = 0; q < m_; ++q) {
            if (w[q] == 0.0) continue;
            const double* a = true_probs_.data() + q * n_;
            for (std::size_t i = 0; i < n_; ++i) mixed_[i] += w[q] * a[i];
        }
    }

    std::size_t m_;
    std::size_t n_;
    std::vector<double> true_probs_;
    std::vector<double> mixed_;
};

void softmax_into(std::span<const double> logits, std::span<double> out) {
    const double top = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (std::size_t q = 0; q < logits.size(); ++q) {
        out[q] = std::exp(logits[q] - top);
        sum += out[q];
    }
    for (double& v : out) v /= sum;
}

}  // namespace

WeightFit optimize_weights(const StackedPredictions& stacked, const LabelVector& labels,
                           const WeightOptimizerOptions& options) {
    const std::size_t m = stacked.learners();
    if (m == 0) throw InvalidArgument("optimize_weights: empty learner list");
    if (stacked.rows() != labels.size()) {
        throw DimensionError("optimize_weights: prediction rows and label count differ");
    }
    if (static_cast<int>(stacked.classes()) != labels.num_classes()) {
        throw DimensionError("optimize_weights: prediction columns and class count differ");
    }
    if (m == 1) {
        WeightVector w = WeightVector::uniform(1);
        return {w, log_loss(stacked[0], labels), 0};
    }

    TrueClassObjective objective(stacked, labels);
    std::vector<double> w(m, 1.0 / static_cast<double>(m));
    std::vector<double> log_w(m, std::log(1.0 / static_cast<double>(m)));
    std::vector<double> grad(m), trial_log_w(m), trial_w(m);

    double loss = objective.loss(w);
    double step = options.step_size;
    std::size_t iterations = 0;
    while (iterations < options.max_iterations) {
        ++iterations;
        objective.loss(w);
        objective.gradient(grad);
        for (std::size_t q = 0; q < m; ++q) trial_log_w[q] = log_w[q] - step * grad[q];
        softmax_into(trial_log_w, trial_w);
        const double trial_loss = objective.loss(trial_w);
        if (!(trial_loss <= loss)) {
            step *= 0.5;
            if (step < 1e-12) break;
            continue;
        }
        const double improvement = loss - trial_loss;
        // Re-center the log weights so they stay bounded.
        const double top = *std::max_element(trial_log_w.begin(), trial_log_w.end());
        for (std::size_t q = 0; q < m; ++q) log_w[q] = trial_log_w[q] - top;
        w = trial_w;
        loss = trial_loss;
        if (improvement < options.tolerance) break;
    }

    // Vertices are feasible; the iterate stops on a tolerance, so a vertex
    // optimum can be approached but not reached exactly.
    std::size_t best_vertex = m;
    for (std::size_t q = 0; q < m; ++q) {
        std::vector<double> e(m, 0.0);
        e[q] = 1.0;
        const double vertex_loss = objective.loss(e);
        if (vertex_loss < loss) {
            loss = vertex_loss;
            best_vertex = q;
        }
    }

    WeightVector weights = best_vertex < m ? WeightVector::vertex(m, best_vertex) : WeightVector(w);
    const double final_loss = log_loss(combine(stacked, weights), labels);
    return {std::move(weights), final_loss, iterations};
}

}  // namespace dsl

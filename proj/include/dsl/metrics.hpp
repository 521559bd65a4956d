#pragma once

#include <cstddef>

#include "dsl/core_data.hpp"

namespace dsl {

/// Probabilities are clipped into [kProbabilityClip, 1 - kProbabilityClip]
/// before taking logarithms. No renormalization afterwards.
inline constexpr double kProbabilityClip = 1e-15;

double clip_probability(double p) noexcept;

struct MetricsRecord {
    double log_loss = 0.0;
    double accuracy = 0.0;
    std::size_t n = 0;
};

/// Mean negative log of the (clipped) probability assigned to the true class.
double log_loss(const ProbabilityMatrix& probs, const LabelVector& labels);

/// Fraction of rows whose argmax (lowest index on ties) equals the label.
double accuracy(const ProbabilityMatrix& probs, const LabelVector& labels);

/// Per-row argmax; ties resolve to the lowest class index.
LabelVector argmax_labels(const ProbabilityMatrix& probs);

MetricsRecord evaluate_metrics(const ProbabilityMatrix& probs, const LabelVector& labels);

}  // namespace dsl

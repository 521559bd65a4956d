#include "dsl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dsl/error.hpp"

namespace dsl {
namespace {

void check_shapes(const ProbabilityMatrix& probs, const LabelVector& labels) {
    if (probs.rows() != labels.size()) {
        throw DimensionError("metrics: " + std::to_string(probs.rows()) + " probability rows vs " +
                             std::to_string(labels.size()) + " labels");
    }
    if (probs.rows() == 0) throw InvalidArgument("metrics: no records");
    if (static_cast<int>(probs.cols()) != labels.num_classes()) {
        throw DimensionError("metrics: " + std::to_string(probs.cols()) + " probability columns vs " +
                             std::to_string(labels.num_classes()) + " classes");
    }
}

std::size_t row_argmax(std::span<const double> row) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < row.size(); ++c) {
        if (row[c] > row[best]) best = c;
    }
    return best;
}

}  // namespace

double clip_probability(double p) noexcept {
    return std::clamp(p, kProbabilityClip, 1.0 - kProbabilityClip);
}

double log_loss(const ProbabilityMatrix& probs, const LabelVector& labels) {
    check_shapes(probs, labels);
    double total = 0.0;
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        const double p = probs(i, static_cast<std::size_t>(labels[i]));
        if (!std::isfinite(p)) throw InvalidArgument("log_loss: non-finite probability");
        total -= std::log(clip_probability(p));
    }
    return total / static_cast<double>(probs.rows());
}

double accuracy(const ProbabilityMatrix& probs, const LabelVector& labels) {
    check_shapes(probs, labels);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        if (row_argmax(probs.row(i)) == static_cast<std::size_t>(labels[i])) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(probs.rows());
}

LabelVector argmax_labels(const ProbabilityMatrix& probs) {
    std::vector<int> out(probs.rows());
    for (std::size_t i = 0; i < probs.rows(); ++i) out[i] = static_cast<int>(row_argmax(probs.row(i)));
    return LabelVector(std::move(out), std::max<int>(2, static_cast<int>(probs.cols())));
}

MetricsRecord evaluate_metrics(const ProbabilityMatrix& probs, const LabelVector& labels) {
    return {log_loss(probs, labels), accuracy(probs, labels), probs.rows()};
}

}  // namespace dsl

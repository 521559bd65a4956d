#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dsl/deep_ensemble.hpp"
#include "dsl/metrics.hpp"

namespace dsl {

struct MethodResult {
    std::string method;
    MetricsRecord metrics;
};

struct BenchmarkResult {
    DslModel model;
    TrainReport report;
    MetricsRecord deep;
    MetricsRecord single_layer;
    MetricsRecord simple_average;
    /// One entry per roster learner, fit alone on the whole training set.
    std::vector<MethodResult> standalone;
    double seconds = 0.0;

    /// Every method, sorted by held-out log loss.
    std::vector<MethodResult> table() const;
};

/// Trains the deep ensemble on `train` and scores it on `test` next to its
/// one-layer and uniform-weight variants and each base learner alone. The
/// variants come from the deep model's first layer, which is exactly what
/// training in those modes with the same config produces.
BenchmarkResult run_benchmark(const Dataset& train, const Dataset& test, TrainConfig config,
                              const ProgressCallback& progress = {});

}  // namespace dsl

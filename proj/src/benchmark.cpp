#include "dsl/benchmark.hpp"

#include <algorithm>
#include <chrono>

#include "dsl/parallel.hpp"
#include "dsl/random.hpp"

namespace dsl {

std::vector<MethodResult> BenchmarkResult::table() const {
    std::vector<MethodResult> rows{{"Deep Super Learner", deep},
                                   {"Super Learner (one layer)", single_layer},
                                   {"Simple average", simple_average}};
    rows.insert(rows.end(), standalone.begin(), standalone.end());
    std::stable_sort(rows.begin(), rows.end(), [](const MethodResult& a, const MethodResult& b) {
        return a.metrics.log_loss < b.metrics.log_loss;
    });
    return rows;
}

BenchmarkResult run_benchmark(const Dataset& train_set, const Dataset& test_set, TrainConfig config,
                              const ProgressCallback& progress) {
    using Clock = std::chrono::steady_clock;
    const auto started = Clock::now();
    config.mode = EnsembleMode::deep;
    const LabelVector& test_labels = test_set.require_labels();

    TrainReport report;
    DslModel model = train(train_set, config, &report, progress);
    const auto layers = predict_layers(model, test_set.features, config.workers);
    const MetricsRecord deep = evaluate_metrics(layers.back(), test_labels);
    const MetricsRecord single = evaluate_metrics(layers.front(), test_labels);
    const DslModel average = simple_average_from(model, report.iterations.front().uniform_loss);
    const MetricsRecord uniform = evaluate_metrics(predict(average, test_set.features, config.workers), test_labels);

    std::vector<std::optional<MetricsRecord>> standalone(config.roster.size());
    parallel_for(config.roster.size(), config.workers, [&](std::size_t q) {
        LearnerSpec spec = config.roster[q];
        spec.seed = derive_seed({config.seed, 0x5eedULL, q});
        const TrainedModel fitted = fit(spec, train_set.features, train_set.require_labels());
        standalone[q] = evaluate_metrics(fitted.predict_proba(test_set.features), test_labels);
    });

    BenchmarkResult result{std::move(model), std::move(report), deep, single, uniform, {}, 0.0};
    for (std::size_t q = 0; q < config.roster.size(); ++q) {
        result.standalone.push_back({std::string(learner_name(config.roster[q].kind)), *standalone[q]});
    }
    result.seconds = std::chrono::duration<double>(Clock::now() - started).count();
    return result;
}

}  // namespace dsl

// End-to-end acceptance checks. Prints one PASS/FAIL/SKIP line per criterion
// and exits non-zero if any gating criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "dsl/benchmark.hpp"
#include "dsl/cross_validation.hpp"
#include "dsl/data_io.hpp"
#include "dsl/deep_ensemble.hpp"
#include "dsl/learners/logistic_regression.hpp"
#include "dsl/metrics.hpp"
#include "dsl/weight_optimizer.hpp"
#include "grid_oracle.hpp"
#include "support.hpp"

using namespace dsl;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(bool ok, const char* id, const std::string& detail) {
    std::printf("%s %-3s %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

void skip(const char* id, const std::string& detail) {
    std::printf("SKIP %-3s %s\n", id, detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, format, a, b, c);
    return buf;
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::size_t machine_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

bool weights_on_simplex(const WeightVector& w) {
    double sum = 0.0;
    for (double v : w.values()) {
        if (!(v >= 0.0)) return false;
        sum += v;
    }
    return std::abs(sum - 1.0) <= 1e-9;
}

bool model_on_simplex(const DslModel& model, const FeatureMatrix& probe) {
    for (const auto& layer : model.layers()) {
        if (!weights_on_simplex(layer.weights)) return false;
    }
    for (const auto& p : predict_layers(model, probe)) {
        if (!testing::rows_on_simplex(p, 1e-9)) return false;
    }
    return true;
}

bool strictly_decreasing(const DslModel& model) {
    for (std::size_t t = 1; t < model.depth(); ++t) {
        if (!(model.layers()[t].train_loss < model.layers()[t - 1].train_loss)) return false;
    }
    return true;
}

struct MnistPaths {
    fs::path images;
    fs::path labels;
};

void mnist_experiment(const MnistPaths& paths) {
    const Dataset all = load_idx(paths.images, paths.labels);
    const std::uint64_t seed = 7;
    const auto split = stratified_split(all.require_labels(), 5000, 1000, seed);
    const Dataset train_set = all.select_rows(split.train);
    const Dataset test_set = all.select_rows(split.test);

    TrainConfig config;
    config.seed = seed;
    config.workers = machine_workers();
    std::printf("MNIST desk-scale run: %zu train, %zu test, %zu features, %zu workers\n", train_set.size(),
                test_set.size(), train_set.features.cols(), config.workers);
    std::fflush(stdout);

    const BenchmarkResult result = run_benchmark(train_set, test_set, config, [](const IterationReport& r) {
        std::printf("  iteration %zu: oof loss %.4f %s (%.1fs)\n", r.iteration, r.loss,
                    r.kept ? "kept" : "discarded", r.seconds);
        std::fflush(stdout);
    });
    for (const auto& row : result.table()) {
        std::printf("  %-28s %.4f  %.2f%%\n", row.method.c_str(), row.metrics.log_loss,
                    100.0 * row.metrics.accuracy);
    }

    double best_base = result.standalone.front().metrics.log_loss;
    for (const auto& row : result.standalone) best_base = std::min(best_base, row.metrics.log_loss);
    const double deep = result.deep.log_loss;
    const double single = result.single_layer.log_loss;

    report(deep <= best_base + 0.02, "2a", fmt("DSL log loss %.4f <= best base learner %.4f + 0.02", deep, best_base));
    report(deep <= single + 0.005, "2b", fmt("DSL log loss %.4f <= single-layer %.4f + 0.005", deep, single));
    report(result.deep.accuracy >= 0.92, "2c", fmt("DSL accuracy %.2f%% >= 92%%", 100.0 * result.deep.accuracy));
    const std::size_t iterations = result.report.iterations.size();
    const bool stopped_early = iterations < config.max_iterations || !result.report.iterations.back().kept;
    report(iterations <= 10 && stopped_early, "2d",
           fmt("converged after %.0f iterations (<= 10)", static_cast<double>(iterations)));
    report(result.seconds <= 1800.0, "2e",
           fmt("runtime %.1fs <= 1800s with %.0f workers", result.seconds, static_cast<double>(config.workers)));

    const auto& first = result.report.iterations.front();
    report(first.uniform_loss >= first.loss - 1e-6, "3",
           fmt("training OOF: uniform %.6f >= optimized %.6f - 1e-6", first.uniform_loss, first.loss));
    report(result.simple_average.log_loss >= single - 0.02, "3",
           fmt("held-out: simple average %.4f >= single-layer %.4f - 0.02", result.simple_average.log_loss, single));

    std::vector<std::size_t> probe_rows(50);
    for (std::size_t i = 0; i < probe_rows.size(); ++i) probe_rows[i] = i;
    report(model_on_simplex(result.model, test_set.features.select_rows(probe_rows)) &&
               strictly_decreasing(result.model),
           "6", "MNIST model: weights and predictions on the simplex, strictly decreasing layer losses");
}

void weight_oracle() {
    Rng rng(2024);
    const auto start = Clock::now();
    double worst = 0.0;
    for (int instance = 0; instance < 50; ++instance) {
        const std::size_t m = 2 + rng.uniform_index(2);
        const std::size_t j = 2 + rng.uniform_index(2);
        const std::size_t n = 10 + rng.uniform_index(191);
        std::vector<ProbabilityMatrix> per_learner;
        for (std::size_t q = 0; q < m; ++q) per_learner.push_back(testing::random_probs(n, j, rng));
        std::vector<int> y(n);
        for (auto& v : y) v = static_cast<int>(rng.uniform_index(j));
        const LabelVector labels(y, static_cast<int>(j));
        const StackedPredictions stacked(std::move(per_learner));
        const double fitted = optimize_weights(stacked, labels).loss;
        worst = std::max(worst, std::abs(fitted - testing::grid_search_loss(stacked, labels, 100)));
    }
    const double elapsed = seconds_since(start);
    report(worst <= 1e-4 && elapsed < 60.0, "4",
           fmt("50 instances: max |optimizer - grid| %.2e <= 1e-4, %.2fs < 60s", worst, elapsed));
}

void metric_examples() {
    double worst = 0.0;
    const LabelVector y01({0, 1}, 2);
    worst = std::max(worst, std::abs(log_loss(ProbabilityMatrix(2, 2, {0.8, 0.2, 0.4, 0.6}), y01) -
                                     (-(std::log(0.8) + std::log(0.6)) / 2.0)));
    worst = std::max(worst, std::abs(log_loss(ProbabilityMatrix(2, 2, {1.0, 0.0, 0.0, 1.0}), y01) -
                                     (-std::log(1.0 - 1e-15))));
    worst = std::max(worst, std::abs(accuracy(ProbabilityMatrix(2, 2, {1.0, 0.0, 0.0, 1.0}), y01) - 1.0));
    worst = std::max(worst, std::abs(accuracy(ProbabilityMatrix(2, 2, {0.9, 0.1, 0.7, 0.3}), y01) - 0.5));
    worst = std::max(worst, std::abs(accuracy(ProbabilityMatrix(1, 2, {0.5, 0.5}), LabelVector(std::vector<int>{0}, 2)) - 1.0));
    report(worst <= 1e-12, "5", fmt("worked examples: max error %.2e <= 1e-12", worst));

    double worst_uniform = 0.0;
    for (int j = 2; j <= 10; ++j) {
        std::vector<int> labels;
        for (int i = 0; i < 5 * j; ++i) labels.push_back((i * 3) % j);
        const auto u = ProbabilityMatrix::uniform(labels.size(), static_cast<std::size_t>(j));
        worst_uniform = std::max(worst_uniform,
                                 std::abs(log_loss(u, LabelVector(labels, j)) - std::log(static_cast<double>(j))));
    }
    report(worst_uniform <= 1e-12, "5", fmt("uniform probabilities: max |loss - ln j| %.2e for j = 2..10", worst_uniform));
}

std::vector<LearnerSpec> small_roster() {
    std::vector<LearnerSpec> roster;
    for (LearnerKind kind : {LearnerKind::logistic_regression, LearnerKind::knn, LearnerKind::random_forest,
                             LearnerKind::extra_trees, LearnerKind::gradient_boosted_trees}) {
        LearnerSpec spec = LearnerSpec::defaults(kind);
        if (auto* f = std::get_if<ForestParams>(&spec.params)) f->trees = 15;
        if (auto* b = std::get_if<BoostingParams>(&spec.params)) b->rounds = 10;
        if (auto* k = std::get_if<KnnParams>(&spec.params)) k->neighbors = 7;
        if (auto* l = std::get_if<LogisticRegressionParams>(&spec.params)) l->max_epochs = 80;
        roster.push_back(spec);
    }
    return roster;
}

bool no_leakage(const Dataset& d) {
    const FoldAssignment folds = stratified_folds(d.require_labels(), 3, 4);
    for (const LearnerSpec& spec : small_roster()) {
        const auto base = out_of_fold_predictions(spec, d, folds);
        for (std::size_t target = 0; target < 3; ++target) {
            Matrix noisy = d.features.matrix();
            Rng rng(900 + target);
            for (std::size_t i = 0; i < d.size(); ++i) {
                if (static_cast<std::size_t>(folds[i]) != target) continue;
                for (double& v : noisy.row(i)) v = rng.uniform01() * 10.0 - 5.0;
            }
            const Dataset perturbed(FeatureMatrix(std::move(noisy)), d.labels);
            const auto result = out_of_fold_predictions(spec, perturbed, folds);
            if (!(result.fold_models[target].predict_proba(d.features) ==
                  base.fold_models[target].predict_proba(d.features))) {
                return false;
            }
            const auto rows = folds.validation_indices(target);
            const auto expected = base.fold_models[target].predict_proba(perturbed.features.select_rows(rows));
            for (std::size_t r = 0; r < rows.size(); ++r) {
                for (std::size_t c = 0; c < expected.cols(); ++c) {
                    if (result.oof(rows[r], c) != expected(r, c)) return false;
                }
            }
        }
    }
    return true;
}

double logistic_gradient_error() {
    Rng rng(31);
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t n = 25, l = 6, j = 3;
        std::vector<double> xv(n * l);
        for (double& v : xv) v = rng.uniform01() * 4.0 - 2.0;
        std::vector<int> yv(n);
        for (std::size_t i = 0; i < n; ++i) yv[i] = static_cast<int>(i % j);
        const Matrix x(n, l, xv);
        const LabelVector y(yv, static_cast<int>(j));
        const SoftmaxObjective objective(x, y, 1e-4);

        Matrix coef(j, l);
        for (double& v : coef.values()) v = rng.uniform01() - 0.5;
        std::vector<double> intercept(j);
        for (double& v : intercept) v = rng.uniform01() - 0.5;
        Matrix grad(j, l), scratch(j, l);
        std::vector<double> grad_b(j), scratch_b(j);
        objective.evaluate(coef, intercept, grad, grad_b);

        const double h = 1e-6;
        auto relative = [](double analytic, double numeric) {
            return std::abs(analytic - numeric) / std::max(1.0, std::abs(numeric));
        };
        for (std::size_t t = 0; t < coef.values().size(); ++t) {
            Matrix plus = coef, minus = coef;
            plus.values()[t] += h;
            minus.values()[t] -= h;
            const double numeric = (objective.evaluate(plus, intercept, scratch, scratch_b) -
                                    objective.evaluate(minus, intercept, scratch, scratch_b)) / (2.0 * h);
            worst = std::max(worst, relative(grad.values()[t], numeric));
        }
        for (std::size_t c = 0; c < j; ++c) {
            auto plus = intercept, minus = intercept;
            plus[c] += h;
            minus[c] -= h;
            const double numeric = (objective.evaluate(coef, plus, scratch, scratch_b) -
                                    objective.evaluate(coef, minus, scratch, scratch_b)) / (2.0 * h);
            worst = std::max(worst, relative(grad_b[c], numeric));
        }
    }
    return worst;
}

void invariant_suites() {
    const Dataset train_set = testing::make_blobs(240, 8, 3, 41, 1.5, 1.2);
    const Dataset probe = testing::make_blobs(60, 8, 3, 42, 1.5, 1.2);
    TrainConfig config;
    config.roster = small_roster();
    config.seed = 5;
    config.max_iterations = 8;
    config.workers = 1;
    const DslModel model = train(train_set, config);

    report(model_on_simplex(model, probe.features), "6", "synthetic model: weights and probability rows on the simplex (1e-9)");
    // Blobs chosen so the cascade grows past one layer; otherwise the check is vacuous.
    report(model.depth() >= 2 && strictly_decreasing(model), "6",
           fmt("synthetic model: %.0f layers with strictly decreasing train loss", static_cast<double>(model.depth())));
    report(no_leakage(train_set), "6", "no leakage: perturbing one fold leaves its model and its OOF rows as predicted");
    const double gradient_error = logistic_gradient_error();
    report(gradient_error <= 1e-5, "6", fmt("logistic regression gradient vs central differences: %.2e <= 1e-5 relative", gradient_error));

    TrainConfig four = config;
    four.workers = 4;
    const DslModel parallel = train(train_set, four);
    const bool same = serialize_model(model) == serialize_model(parallel) &&
                      predict(model, probe.features, 1) == predict(parallel, probe.features, 4);
    report(same, "6", "workers 1 and 4 give identical archives and predictions");

    testing::TempDir dir("acceptance");
    const fs::path path = dir / "model.dsl";
    save_model(model, path);
    const DslModel loaded = load_model(path);
    report(predict(loaded, probe.features) == predict(model, probe.features) &&
               serialize_model(loaded) == serialize_model(model),
           "6", "archive round trip gives bitwise equal predictions");
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path data_dir = DSL_DATA_DIR;
    const bool quick = argc > 1 && std::string(argv[1]) == "--quick";
    skip("1", "full-scale results need the full datasets and hours of compute; criteria 2-6 substitute");

    const MnistPaths desk{data_dir / "mnist" / "digits10k-images-idx3-ubyte.gz",
                          data_dir / "mnist" / "digits10k-labels-idx1-ubyte.gz"};
    if (quick) {
        skip("2", "--quick given");
        skip("3", "--quick given");
    } else if (fs::exists(desk.images) && fs::exists(desk.labels)) {
        mnist_experiment(desk);
    } else {
        report(false, "2", "MNIST digits not found under " + (data_dir / "mnist").string());
    }
    weight_oracle();
    metric_examples();
    invariant_suites();

    const fs::path full_images = data_dir / "mnist" / "train-images-idx3-ubyte.gz";
    if (!fs::exists(full_images)) {
        skip("7", "full MNIST (60k/10k) not present; optional and not gating");
    } else {
        skip("7", "full MNIST present; run `dsl benchmark` on it by hand (hours on one core)");
    }

    std::printf("%s: %d failing criteria\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
    return failures == 0 ? 0 : 1;
}

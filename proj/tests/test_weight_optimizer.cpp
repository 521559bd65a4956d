#include <doctest.h>

#include <cmath>

#include "dsl/error.hpp"
#include "dsl/metrics.hpp"
#include "dsl/weight_optimizer.hpp"
#include "grid_oracle.hpp"
#include "support.hpp"

using namespace dsl;

namespace {

bool on_simplex(const WeightVector& w) {
    double sum = 0.0;
    for (double v : w.values()) {
        if (v < 0.0) return false;
        sum += v;
    }
    return std::abs(sum - 1.0) <= 1e-9;
}

LabelVector random_labels(std::size_t n, std::size_t j, Rng& rng) {
    std::vector<int> y(n);
    for (auto& v : y) v = static_cast<int>(rng.uniform_index(j));
    return LabelVector(std::move(y), static_cast<int>(j));
}

}  // namespace

TEST_CASE("weight vector validation") {
    CHECK_NOTHROW(WeightVector({0.25, 0.75}));
    CHECK_THROWS_AS(WeightVector({0.5, 0.6}), InvalidArgument);
    CHECK_THROWS_AS(WeightVector({-0.1, 1.1}), InvalidArgument);
    CHECK_THROWS_AS(WeightVector(std::vector<double>{}), InvalidArgument);
    CHECK(WeightVector::vertex(3, 1).values()[1] == 1.0);
    CHECK(on_simplex(WeightVector::uniform(7)));
}

TEST_CASE("combine examples") {
    const ProbabilityMatrix a(1, 2, {0.8, 0.2});
    const ProbabilityMatrix b(1, 2, {0.5, 0.5});
    const ProbabilityMatrix c = combine(StackedPredictions({a, b}), WeightVector({0.3, 0.7}));
    CHECK(c(0, 0) == doctest::Approx(0.59).epsilon(1e-15));
    CHECK(c(0, 1) == doctest::Approx(0.41).epsilon(1e-15));

    const ProbabilityMatrix e0(1, 2, {1.0, 0.0});
    const ProbabilityMatrix e1(1, 2, {0.0, 1.0});
    const ProbabilityMatrix half = combine(StackedPredictions({e0, e1}), WeightVector::uniform(2));
    CHECK(half(0, 0) == 0.5);
    CHECK(half(0, 1) == 0.5);

    CHECK(combine(StackedPredictions({a}), WeightVector::uniform(1)) == a);
}

TEST_CASE("combine rejects mismatched lengths and shapes") {
    const ProbabilityMatrix a(1, 2, {0.8, 0.2});
    CHECK_THROWS_AS(combine(StackedPredictions({a, a}), WeightVector::uniform(3)), DimensionError);
    CHECK_THROWS_AS(StackedPredictions({a, ProbabilityMatrix(2, 2, {0.5, 0.5, 0.5, 0.5})}), DimensionError);
}

TEST_CASE("single learner") {
    Rng rng(1);
    const auto p = testing::random_probs(30, 3, rng);
    const auto y = random_labels(30, 3, rng);
    const WeightFit fit = optimize_weights(StackedPredictions({p}), y);
    CHECK(fit.weights.values()[0] == 1.0);
    CHECK(fit.loss == log_loss(p, y));
}

TEST_CASE("perfect learner against uniform learner") {
    const std::size_t n = 40;
    std::vector<int> labels;
    std::vector<double> perfect;
    for (std::size_t i = 0; i < n; ++i) {
        const int c = static_cast<int>(i % 3);
        labels.push_back(c);
        for (int k = 0; k < 3; ++k) perfect.push_back(k == c ? 1.0 : 0.0);
    }
    const LabelVector y(labels, 3);
    const StackedPredictions stacked(
        {ProbabilityMatrix(n, 3, perfect), ProbabilityMatrix::uniform(n, 3)});
    const WeightFit fit = optimize_weights(stacked, y);
    CHECK(fit.weights[0] == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(fit.loss < 1e-6);
}

TEST_CASE("identical learners give the single-learner loss") {
    Rng rng(2);
    const auto p = testing::random_probs(50, 4, rng);
    const auto y = random_labels(50, 4, rng);
    const WeightFit fit = optimize_weights(StackedPredictions({p, p}), y);
    CHECK(fit.loss == doctest::Approx(log_loss(p, y)).epsilon(1e-14));
    CHECK(on_simplex(fit.weights));
}

TEST_CASE("optimizer dominates vertices and uniform weights") {
    Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t m = 2 + rng.uniform_index(4);
        const std::size_t j = 2 + rng.uniform_index(3);
        const std::size_t n = 10 + rng.uniform_index(100);
        std::vector<ProbabilityMatrix> per;
        for (std::size_t q = 0; q < m; ++q) per.push_back(testing::random_probs(n, j, rng));
        const auto y = random_labels(n, j, rng);
        const StackedPredictions stacked(per);
        const WeightFit fit = optimize_weights(stacked, y);
        CHECK(on_simplex(fit.weights));
        CHECK(fit.loss == log_loss(combine(stacked, fit.weights), y));
        for (std::size_t q = 0; q < m; ++q) CHECK(fit.loss <= log_loss(per[q], y) + 1e-6);
        CHECK(fit.loss <= log_loss(combine(stacked, WeightVector::uniform(m)), y) + 1e-6);
    }
}

TEST_CASE("optimizer matches the simplex grid oracle") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t m = 2 + rng.uniform_index(2);
        const std::size_t j = 2 + rng.uniform_index(2);
        const std::size_t n = 20 + rng.uniform_index(181);
        std::vector<ProbabilityMatrix> per;
        for (std::size_t q = 0; q < m; ++q) per.push_back(testing::random_probs(n, j, rng));
        const auto y = random_labels(n, j, rng);
        const StackedPredictions stacked(per);
        const double grid = testing::grid_search_loss(stacked, y);
        const WeightFit fit = optimize_weights(stacked, y);
        CHECK(std::abs(fit.loss - grid) <= 1e-4);
        // The continuous optimum lies at or below the grid optimum; the
        // iterate stops on a tolerance, so allow a small excess.
        CHECK(fit.loss <= grid + 1e-5);
    }
}

TEST_CASE("permuting learners permutes the weights") {
    Rng rng(23);
    const auto a = testing::random_probs(60, 3, rng);
    const auto b = testing::random_probs(60, 3, rng);
    const auto c = testing::random_probs(60, 3, rng);
    const auto y = random_labels(60, 3, rng);
    const WeightFit abc = optimize_weights(StackedPredictions({a, b, c}), y);
    const WeightFit cab = optimize_weights(StackedPredictions({c, a, b}), y);
    CHECK(abc.loss == doctest::Approx(cab.loss).epsilon(1e-10));
    CHECK(abc.weights[0] == doctest::Approx(cab.weights[1]).epsilon(1e-5));
    CHECK(abc.weights[1] == doctest::Approx(cab.weights[2]).epsilon(1e-5));
    CHECK(abc.weights[2] == doctest::Approx(cab.weights[0]).epsilon(1e-5));
}

TEST_CASE("optimizer is deterministic") {
    Rng rng(29);
    const auto a = testing::random_probs(80, 4, rng);
    const auto b = testing::random_probs(80, 4, rng);
    const auto y = random_labels(80, 4, rng);
    const StackedPredictions s({a, b});
    const WeightFit first = optimize_weights(s, y);
    const WeightFit second = optimize_weights(s, y);
    CHECK(first.weights == second.weights);
    CHECK(first.loss == second.loss);
}

TEST_CASE("empty learner list is an error") {
    CHECK_THROWS_AS(optimize_weights(StackedPredictions{}, LabelVector({0, 1}, 2)), InvalidArgument);
}

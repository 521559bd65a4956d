#include <doctest.h>

#include <cmath>

#include "dsl/learners.hpp"
#include "dsl/simd/kernels.hpp"
#include "support.hpp"

using namespace dsl;
using namespace dsl::simd;

namespace {

std::vector<double> random_vector(std::size_t n, Rng& rng) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform01() * 2.0 - 1.0;
    return v;
}

bool close(double a, double b, double scale) { return std::abs(a - b) <= 1e-12 * std::max(1.0, scale); }

}  // namespace

TEST_CASE("isa names") {
    CHECK(parse_isa("scalar") == Isa::scalar);
    CHECK(parse_isa("avx2") == Isa::avx2);
    CHECK_FALSE(parse_isa("neon").has_value());
    CHECK(isa_name(Isa::avx2) == "avx2");
    REQUIRE(kernel_table(Isa::scalar) != nullptr);
}

TEST_CASE("scalar kernels on small hand-checked inputs") {
    const KernelTable& k = *kernel_table(Isa::scalar);
    const double a[3] = {1, 2, 3};
    const double b[3] = {4, -5, 6};
    CHECK(k.dot(a, b, 3) == 12.0);
    CHECK(k.squared_distance(a, b, 3) == 9.0 + 49.0 + 9.0);
    double y[3] = {1, 1, 1};
    k.axpy(2.0, a, y, 3);
    CHECK(y[2] == 7.0);
}

TEST_CASE("vector kernels agree with the scalar reference") {
    const KernelTable* wide = kernel_table(Isa::avx2);
    if (wide == nullptr) {
        MESSAGE("AVX2 kernels unavailable on this machine; only the scalar path is tested");
        return;
    }
    const KernelTable& ref = *kernel_table(Isa::scalar);
    Rng rng(1234);
    for (std::size_t n = 0; n <= 37; ++n) {
        CAPTURE(n);
        const auto a = random_vector(n, rng);
        const auto b = random_vector(n, rng);
        CHECK(close(wide->dot(a.data(), b.data(), n), ref.dot(a.data(), b.data(), n), static_cast<double>(n)));
        CHECK(close(wide->squared_distance(a.data(), b.data(), n), ref.squared_distance(a.data(), b.data(), n),
                    4.0 * static_cast<double>(n)));

        auto y1 = random_vector(n, rng);
        auto y2 = y1;
        ref.axpy(0.37, a.data(), y1.data(), n);
        wide->axpy(0.37, a.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(close(y1[i], y2[i], 1.0));

        for (std::size_t count : {1, 3, 4, 5, 9}) {
            const auto rows = random_vector(count * n, rng);
            std::vector<double> o1(count), o2(count);
            ref.squared_distances(a.data(), rows.data(), count, n, o1.data());
            wide->squared_distances(a.data(), rows.data(), count, n, o2.data());
            for (std::size_t r = 0; r < count; ++r) CHECK(close(o1[r], o2[r], 4.0 * static_cast<double>(n)));

            ref.dot_rows(a.data(), rows.data(), count, n, o1.data());
            wide->dot_rows(a.data(), rows.data(), count, n, o2.data());
            for (std::size_t r = 0; r < count; ++r) CHECK(close(o1[r], o2[r], static_cast<double>(n)));

            const auto coeff = random_vector(count, rng);
            auto m1 = random_vector(count * n, rng);
            auto m2 = m1;
            ref.rank1_update(coeff.data(), a.data(), m1.data(), count, n);
            wide->rank1_update(coeff.data(), a.data(), m2.data(), count, n);
            for (std::size_t t = 0; t < m1.size(); ++t) CHECK(close(m1[t], m2[t], 1.0));
        }
    }
}

TEST_CASE("learners agree across instruction sets") {
    if (kernel_table(Isa::avx2) == nullptr) return;
    const Dataset train = testing::make_blobs(80, 9, 3, 55, 1.0, 1.0);
    const Dataset probe = testing::make_blobs(30, 9, 3, 56, 1.0, 1.0);
    for (LearnerKind kind : {LearnerKind::logistic_regression, LearnerKind::knn}) {
        CAPTURE(learner_name(kind));
        LearnerSpec spec = LearnerSpec::defaults(kind);
        if (auto* l = std::get_if<LogisticRegressionParams>(&spec.params)) l->max_epochs = 100;
        ProbabilityMatrix scalar_out, wide_out;
        {
            ScopedIsa isa(Isa::scalar);
            REQUIRE(isa.active());
            CHECK(kernels().isa == Isa::scalar);
            scalar_out = fit(spec, train.features, *train.labels).predict_proba(probe.features);
        }
        {
            ScopedIsa isa(Isa::avx2);
            REQUIRE(isa.active());
            wide_out = fit(spec, train.features, *train.labels).predict_proba(probe.features);
        }
        for (std::size_t i = 0; i < probe.size(); ++i) {
            for (std::size_t c = 0; c < 3; ++c) CHECK(std::abs(scalar_out(i, c) - wide_out(i, c)) <= 1e-9);
        }
    }
}

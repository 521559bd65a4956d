#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dsl/core_data.hpp"
#include "dsl/random.hpp"

namespace dsl::testing {

/// Gaussian-ish blobs: class c is centered at c * separation on a
/// class-specific feature, with uniform noise of half-width `noise` elsewhere.
inline Dataset make_blobs(std::size_t n, std::size_t features, int classes, std::uint64_t seed,
                          double separation = 2.0, double noise = 1.0) {
    Rng rng(seed);
    std::vector<double> x(n * features);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int c = static_cast<int>(i % static_cast<std::size_t>(classes));
        y[i] = c;
        for (std::size_t f = 0; f < features; ++f) {
            double v = (rng.uniform01() * 2.0 - 1.0) * noise;
            if (f % static_cast<std::size_t>(classes) == static_cast<std::size_t>(c)) v += separation;
            x[i * features + f] = v;
        }
    }
    std::vector<std::string> names;
    for (int c = 0; c < classes; ++c) names.push_back(std::to_string(c));
    return Dataset(FeatureMatrix(n, features, std::move(x)), LabelVector(std::move(y), classes), names);
}

/// Random row-stochastic matrix with entries bounded away from zero.
inline ProbabilityMatrix random_probs(std::size_t rows, std::size_t cols, Rng& rng) {
    std::vector<double> v(rows * cols);
    for (std::size_t i = 0; i < rows; ++i) {
        double sum = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
            v[i * cols + c] = 0.05 + rng.uniform01();
            sum += v[i * cols + c];
        }
        for (std::size_t c = 0; c < cols; ++c) v[i * cols + c] /= sum;
        double total = 0.0;
        for (std::size_t c = 0; c + 1 < cols; ++c) total += v[i * cols + c];
        v[i * cols + cols - 1] = 1.0 - total;
    }
    return ProbabilityMatrix(rows, cols, std::move(v));
}

inline bool rows_on_simplex(const ProbabilityMatrix& p, double tol = 1e-9) {
    for (std::size_t i = 0; i < p.rows(); ++i) {
        double sum = 0.0;
        for (double v : p.row(i)) {
            if (!(v >= 0.0 && v <= 1.0 + tol)) return false;
            sum += v;
        }
        if (std::abs(sum - 1.0) > tol) return false;
    }
    return true;
}

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("dsl_test_" + tag + "_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace dsl::testing

#include "dsl/simd/kernels.hpp"

// Reference kernels. Plain index-order loops; the vector variants are tested
// against these.

namespace dsl::simd::detail {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double squared_distance(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void squared_distances(const double* query, const double* rows, std::size_t count,
                       std::size_t dim, double* out) {
    for (std::size_t r = 0; r < count; ++r) out[r] = squared_distance(query, rows + r * dim, dim);
}

void dot_rows(const double* x, const double* rows, std::size_t count, std::size_t dim,
              double* out) {
    for (std::size_t r = 0; r < count; ++r) out[r] = dot(x, rows + r * dim, dim);
}

void rank1_update(const double* coeff, const double* x, double* rows, std::size_t count,
                  std::size_t dim) {
    for (std::size_t r = 0; r < count; ++r) axpy(coeff[r], x, rows + r * dim, dim);
}

constexpr KernelTable kScalar{
    Isa::scalar, dot, squared_distance, axpy, squared_distances, dot_rows, rank1_update,
};

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

}  // namespace dsl::simd::detail

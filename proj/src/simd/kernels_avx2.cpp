#include "dsl/simd/kernels.hpp"

#if defined(DSL_HAVE_AVX2)

#include <immintrin.h>

// Built with -mavx2 -mfma. Only reached after the dispatcher has checked the
// CPU flags.

namespace dsl::simd::detail {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    __m256d acc2 = _mm256_setzero_pd();
    __m256d acc3 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
        acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8), acc2);
        acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12), acc3);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    }
    double s = hsum(_mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3)));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double squared_distance(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    __m256d acc2 = _mm256_setzero_pd();
    __m256d acc3 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
        const __m256d d2 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8));
        const __m256d d3 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12));
        acc0 = _mm256_fmadd_pd(d0, d0, acc0);
        acc1 = _mm256_fmadd_pd(d1, d1, acc1);
        acc2 = _mm256_fmadd_pd(d2, d2, acc2);
        acc3 = _mm256_fmadd_pd(d3, d3, acc3);
    }
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc0 = _mm256_fmadd_pd(d, d, acc0);
    }
    double s = hsum(_mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3)));
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
        _mm256_storeu_pd(y + i + 4,
                         _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4)));
    }
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void squared_distances(const double* query, const double* rows, std::size_t count,
                       std::size_t dim, double* out) {
    for (std::size_t r = 0; r < count; ++r) out[r] = squared_distance(query, rows + r * dim, dim);
}

// Four rows per pass so each load of x feeds four accumulators.
void dot_rows(const double* x, const double* rows, std::size_t count, std::size_t dim,
              double* out) {
    std::size_t r = 0;
    for (; r + 4 <= count; r += 4) {
        const double* w0 = rows + r * dim;
        const double* w1 = w0 + dim;
        const double* w2 = w1 + dim;
        const double* w3 = w2 + dim;
        __m256d a0 = _mm256_setzero_pd();
        __m256d a1 = _mm256_setzero_pd();
        __m256d a2 = _mm256_setzero_pd();
        __m256d a3 = _mm256_setzero_pd();
        std::size_t i = 0;
        for (; i + 4 <= dim; i += 4) {
            const __m256d vx = _mm256_loadu_pd(x + i);
            a0 = _mm256_fmadd_pd(vx, _mm256_loadu_pd(w0 + i), a0);
            a1 = _mm256_fmadd_pd(vx, _mm256_loadu_pd(w1 + i), a1);
            a2 = _mm256_fmadd_pd(vx, _mm256_loadu_pd(w2 + i), a2);
            a3 = _mm256_fmadd_pd(vx, _mm256_loadu_pd(w3 + i), a3);
        }
        double s0 = hsum(a0), s1 = hsum(a1), s2 = hsum(a2), s3 = hsum(a3);
        for (; i < dim; ++i) {
            s0 += x[i] * w0[i];
            s1 += x[i] * w1[i];
            s2 += x[i] * w2[i];
            s3 += x[i] * w3[i];
        }
        out[r] = s0;
        out[r + 1] = s1;
        out[r + 2] = s2;
        out[r + 3] = s3;
    }
    for (; r < count; ++r) out[r] = dot(x, rows + r * dim, dim);
}

void rank1_update(const double* coeff, const double* x, double* rows, std::size_t count,
                  std::size_t dim) {
    std::size_t r = 0;
    for (; r + 4 <= count; r += 4) {
        double* w0 = rows + r * dim;
        double* w1 = w0 + dim;
        double* w2 = w1 + dim;
        double* w3 = w2 + dim;
        const __m256d c0 = _mm256_set1_pd(coeff[r]);
        const __m256d c1 = _mm256_set1_pd(coeff[r + 1]);
        const __m256d c2 = _mm256_set1_pd(coeff[r + 2]);
        const __m256d c3 = _mm256_set1_pd(coeff[r + 3]);
        std::size_t i = 0;
        for (; i + 4 <= dim; i += 4) {
            const __m256d vx = _mm256_loadu_pd(x + i);
            _mm256_storeu_pd(w0 + i, _mm256_fmadd_pd(c0, vx, _mm256_loadu_pd(w0 + i)));
            _mm256_storeu_pd(w1 + i, _mm256_fmadd_pd(c1, vx, _mm256_loadu_pd(w1 + i)));
            _mm256_storeu_pd(w2 + i, _mm256_fmadd_pd(c2, vx, _mm256_loadu_pd(w2 + i)));
            _mm256_storeu_pd(w3 + i, _mm256_fmadd_pd(c3, vx, _mm256_loadu_pd(w3 + i)));
        }
        for (; i < dim; ++i) {
            w0[i] += coeff[r] * x[i];
            w1[i] += coeff[r + 1] * x[i];
            w2[i] += coeff[r + 2] * x[i];
            w3[i] += coeff[r + 3] * x[i];
        }
    }
    for (; r < count; ++r) axpy(coeff[r], x, rows + r * dim, dim);
}

constexpr KernelTable kAvx2{
    Isa::avx2, dot, squared_distance, axpy, squared_distances, dot_rows, rank1_update,
};

}  // namespace

const KernelTable* avx2_table() noexcept { return &kAvx2; }

}  // namespace dsl::simd::detail

#else

namespace dsl::simd::detail {
const KernelTable* avx2_table() noexcept { return nullptr; }
}  // namespace dsl::simd::detail

#endif

#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

namespace dsl::simd {

/// Instruction set of a kernel table.
enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa) noexcept;
std::optional<Isa> parse_isa(std::string_view name) noexcept;

/// Inner loops shared by the learners and the weight optimizer. Every table
/// computes the same functions; only summation order differs between them,
/// so results agree to rounding.
struct KernelTable {
    Isa isa;

    /// sum_i a[i] * b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);

    /// sum_i (a[i] - b[i])^2
    double (*squared_distance)(const double* a, const double* b, std::size_t n);

    /// y[i] += alpha * x[i]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

    /// out[r] = squared_distance(query, rows + r * dim, dim) for r < count.
    void (*squared_distances)(const double* query, const double* rows, std::size_t count,
                              std::size_t dim, double* out);

    /// out[r] = dot(x, rows + r * dim, dim) for r < count.
    void (*dot_rows)(const double* x, const double* rows, std::size_t count, std::size_t dim,
                     double* out);

    /// rows[r * dim + i] += coeff[r] * x[i] for r < count.
    void (*rank1_update)(const double* coeff, const double* x, double* rows, std::size_t count,
                         std::size_t dim);
};

/// Table for `isa`, or nullptr when this build or this CPU lacks it.
const KernelTable* kernel_table(Isa isa) noexcept;

/// The active table. Chosen on first use: the DSL_SIMD environment variable
/// ("scalar" or "avx2") if set and supported, otherwise the widest supported.
const KernelTable& kernels() noexcept;

/// Overrides the active table; returns false when `isa` is unavailable.
bool set_active_isa(Isa isa) noexcept;

/// Restores the previous table on destruction. Test helper.
class ScopedIsa {
public:
    explicit ScopedIsa(Isa isa) noexcept;
    ~ScopedIsa();
    ScopedIsa(const ScopedIsa&) = delete;
    ScopedIsa& operator=(const ScopedIsa&) = delete;
    bool active() const noexcept { return ok_; }

private:
    Isa previous_;
    bool ok_;
};

namespace detail {
const KernelTable& scalar_table() noexcept;
const KernelTable* avx2_table() noexcept;
}  // namespace detail

}  // namespace dsl::simd

#include <atomic>
#include <cstdlib>

#include "dsl/simd/kernels.hpp"

namespace dsl::simd {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(__x86_64__) || defined(__i386__)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable* choose_default() noexcept {
    if (const char* env = std::getenv("DSL_SIMD")) {
        if (auto isa = parse_isa(env)) {
            if (const KernelTable* t = kernel_table(*isa)) return t;
        }
    }
    if (const KernelTable* t = kernel_table(Isa::avx2)) return t;
    return &detail::scalar_table();
}

std::atomic<const KernelTable*>& active_slot() noexcept {
    static std::atomic<const KernelTable*> slot{choose_default()};
    return slot;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
    }
    return "unknown";
}

std::optional<Isa> parse_isa(std::string_view name) noexcept {
    if (name == "scalar") return Isa::scalar;
    if (name == "avx2") return Isa::avx2;
    return std::nullopt;
}

const KernelTable* kernel_table(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return &detail::scalar_table();
        case Isa::avx2: return cpu_has_avx2() ? detail::avx2_table() : nullptr;
    }
    return nullptr;
}

const KernelTable& kernels() noexcept { return *active_slot().load(std::memory_order_acquire); }

bool set_active_isa(Isa isa) noexcept {
    const KernelTable* t = kernel_table(isa);
    if (t == nullptr) return false;
    active_slot().store(t, std::memory_order_release);
    return true;
}

ScopedIsa::ScopedIsa(Isa isa) noexcept : previous_(kernels().isa), ok_(set_active_isa(isa)) {}

ScopedIsa::~ScopedIsa() { set_active_isa(previous_); }

}  // namespace dsl::simd

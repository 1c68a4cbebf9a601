#include "scribe/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace scribe::kernels {
namespace {

const KernelTable &table_for(Backend b) {
    switch (b) {
#if defined(SCRIBE_HAVE_AVX2_KERNELS)
    case Backend::Avx2:
        return avx2_table();
#endif
#if defined(SCRIBE_HAVE_NEON_KERNELS)
    case Backend::Neon:
        return neon_table();
#endif
    default:
        return scalar_table();
    }
}

std::atomic<const KernelTable *> &current() {
    static std::atomic<const KernelTable *> table{&table_for(detect())};
    return table;
}

} // namespace

bool available(Backend b) {
    switch (b) {
    case Backend::Scalar:
        return true;
    case Backend::Avx2:
#if defined(SCRIBE_HAVE_AVX2_KERNELS)
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
        return false;
#endif
    case Backend::Neon:
#if defined(SCRIBE_HAVE_NEON_KERNELS)
        return true;
#else
        return false;
#endif
    }
    return false;
}

Backend parse_backend(std::string_view name) {
    if (name == "scalar") return Backend::Scalar;
    if (name == "avx2") return Backend::Avx2;
    if (name == "neon") return Backend::Neon;
    throw std::invalid_argument("unknown kernel backend: " + std::string(name));
}

std::string_view backend_name(Backend b) {
    switch (b) {
    case Backend::Scalar:
        return "scalar";
    case Backend::Avx2:
        return "avx2";
    case Backend::Neon:
        return "neon";
    }
    return "scalar";
}

Backend detect() {
    if (const char *env = std::getenv("SCRIBE_KERNELS"); env && *env) {
        const Backend wanted = parse_backend(env);
        if (available(wanted)) return wanted;
        return Backend::Scalar;
    }
    if (available(Backend::Avx2)) return Backend::Avx2;
    if (available(Backend::Neon)) return Backend::Neon;
    return Backend::Scalar;
}

const KernelTable &active() { return *current().load(std::memory_order_acquire); }

Backend active_backend() {
    const KernelTable *t = current().load(std::memory_order_acquire);
    for (Backend b : {Backend::Avx2, Backend::Neon})
        if (available(b) && t == &table_for(b)) return b;
    return Backend::Scalar;
}

const KernelTable &table(Backend b) {
    if (!available(b))
        throw std::invalid_argument("kernel backend not available: " +
                                    std::string(backend_name(b)));
    return table_for(b);
}

void select_backend(Backend b) {
    if (!available(b))
        throw std::invalid_argument("kernel backend not available: " +
                                    std::string(backend_name(b)));
    current().store(&table_for(b), std::memory_order_release);
}

} // namespace scribe::kernels

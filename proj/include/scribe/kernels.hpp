#pragma once

// Dense double-precision inner loops used by the recurrent layers.
//
// Every kernel has a scalar reference implementation and, where the target
// supports it, a SIMD variant (AVX2+FMA on x86-64, NEON on AArch64). The
// variant is chosen once at startup from the CPU feature bits and can be
// overridden with SCRIBE_KERNELS=scalar|avx2|neon or select_backend().
//
// All matrices are row-major with a leading dimension equal to `cols`.

#include <cstddef>
#include <string_view>

namespace scribe::kernels {

enum class Backend { Scalar, Avx2, Neon };

struct KernelTable {
    Backend backend;
    const char *name;
    // sum_i x[i] * y[i]
    double (*dot)(const double *x, const double *y, std::size_t n);
    // y += a * x
    void (*axpy)(double a, const double *x, double *y, std::size_t n);
    // y += W x        (W: rows x cols)
    void (*gemv)(const double *W, std::size_t rows, std::size_t cols,
                 const double *x, double *y);
    // out += W^T v    (W: rows x cols, v: rows, out: cols)
    void (*gemv_t)(const double *W, std::size_t rows, std::size_t cols,
                   const double *v, double *out);
    // G += u x^T      (G: rows x cols, u: rows, x: cols)
    void (*ger)(double *G, std::size_t rows, std::size_t cols, const double *u,
                const double *x);
};

const KernelTable &scalar_table();
#if defined(SCRIBE_HAVE_AVX2_KERNELS)
const KernelTable &avx2_table();
#endif
#if defined(SCRIBE_HAVE_NEON_KERNELS)
const KernelTable &neon_table();
#endif

// True when the backend is compiled in and the running CPU supports it.
bool available(Backend b);

// Best backend for this CPU, honouring SCRIBE_KERNELS when set.
Backend detect();

// Currently selected table. Selection is process-wide.
const KernelTable &active();
Backend active_backend();

// Table of a specific backend; throws std::invalid_argument when unavailable.
const KernelTable &table(Backend b);

// Throws std::invalid_argument when the backend is unavailable.
void select_backend(Backend b);

Backend parse_backend(std::string_view name);
std::string_view backend_name(Backend b);

inline double dot(const double *x, const double *y, std::size_t n) {
    return active().dot(x, y, n);
}
inline void axpy(double a, const double *x, double *y, std::size_t n) {
    active().axpy(a, x, y, n);
}
inline void gemv(const double *W, std::size_t rows, std::size_t cols,
                 const double *x, double *y) {
    active().gemv(W, rows, cols, x, y);
}
inline void gemv_t(const double *W, std::size_t rows, std::size_t cols,
                   const double *v, double *out) {
    active().gemv_t(W, rows, cols, v, out);
}
inline void ger(double *G, std::size_t rows, std::size_t cols, const double *u,
                const double *x) {
    active().ger(G, rows, cols, u, x);
}

} // namespace scribe::kernels

// AArch64 NEON variants. Advanced SIMD is mandatory on AArch64, so no runtime
// feature check is needed beyond the build-time architecture test.

#include "scribe/kernels.hpp"

#include <arm_neon.h>

namespace scribe::kernels {
namespace {

double dot_neon(const double *x, const double *y, std::size_t n) {
    float64x2_t a0 = vdupq_n_f64(0.0);
    float64x2_t a1 = vdupq_n_f64(0.0);
    float64x2_t a2 = vdupq_n_f64(0.0);
    float64x2_t a3 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        a0 = vfmaq_f64(a0, vld1q_f64(x + i), vld1q_f64(y + i));
        a1 = vfmaq_f64(a1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
        a2 = vfmaq_f64(a2, vld1q_f64(x + i + 4), vld1q_f64(y + i + 4));
        a3 = vfmaq_f64(a3, vld1q_f64(x + i + 6), vld1q_f64(y + i + 6));
    }
    for (; i + 2 <= n; i += 2)
        a0 = vfmaq_f64(a0, vld1q_f64(x + i), vld1q_f64(y + i));
    double acc = vaddvq_f64(vaddq_f64(vaddq_f64(a0, a1), vaddq_f64(a2, a3)));
    for (; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void axpy_neon(double a, const double *x, double *y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
        vst1q_f64(y + i + 2, vfmaq_f64(vld1q_f64(y + i + 2), va, vld1q_f64(x + i + 2)));
    }
    for (; i + 2 <= n; i += 2)
        vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

void gemv_neon(const double *W, std::size_t rows, std::size_t cols,
               const double *x, double *y) {
    for (std::size_t r = 0; r < rows; ++r) y[r] += dot_neon(W + r * cols, x, cols);
}

void gemv_t_neon(const double *W, std::size_t rows, std::size_t cols,
                 const double *v, double *out) {
    for (std::size_t r = 0; r < rows; ++r) {
        if (v[r] == 0.0) continue;
        axpy_neon(v[r], W + r * cols, out, cols);
    }
}

void ger_neon(double *G, std::size_t rows, std::size_t cols, const double *u,
              const double *x) {
    for (std::size_t r = 0; r < rows; ++r) {
        if (u[r] == 0.0) continue;
        axpy_neon(u[r], x, G + r * cols, cols);
    }
}

} // namespace

const KernelTable &neon_table() {
    static const KernelTable table{Backend::Neon, "neon",    dot_neon,
                                   axpy_neon,     gemv_neon, gemv_t_neon,
                                   ger_neon};
    return table;
}

} // namespace scribe::kernels

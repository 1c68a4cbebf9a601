// AVX2 + FMA variants. This translation unit is compiled with -mavx2 -mfma and
// must only be entered after a runtime CPU check (see dispatch.cpp).

#include "scribe/kernels.hpp"

#include <immintrin.h>

namespace scribe::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(const double *x, const double *y, std::size_t n) {
    __m256d a0 = _mm256_setzero_pd();
    __m256d a1 = _mm256_setzero_pd();
    __m256d a2 = _mm256_setzero_pd();
    __m256d a3 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a0);
        a1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), a1);
        a2 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 8), _mm256_loadu_pd(y + i + 8), a2);
        a3 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 12), _mm256_loadu_pd(y + i + 12), a3);
    }
    for (; i + 4 <= n; i += 4)
        a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a0);
    double acc = hsum(_mm256_add_pd(_mm256_add_pd(a0, a1), _mm256_add_pd(a2, a3)));
    for (; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void axpy_avx2(double a, const double *x, double *y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i),
                                                _mm256_loadu_pd(y + i)));
        _mm256_storeu_pd(y + i + 4, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4),
                                                    _mm256_loadu_pd(y + i + 4)));
    }
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i),
                                                _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

// Four rows per pass so each load of x feeds four FMAs.
void gemv_avx2(const double *W, std::size_t rows, std::size_t cols,
               const double *x, double *y) {
    std::size_t r = 0;
    for (; r + 4 <= rows; r += 4) {
        const double *w0 = W + r * cols;
        const double *w1 = w0 + cols;
        const double *w2 = w1 + cols;
        const double *w3 = w2 + cols;
        __m256d s0 = _mm256_setzero_pd();
        __m256d s1 = _mm256_setzero_pd();
        __m256d s2 = _mm256_setzero_pd();
        __m256d s3 = _mm256_setzero_pd();
        std::size_t c = 0;
        for (; c + 4 <= cols; c += 4) {
            const __m256d vx = _mm256_loadu_pd(x + c);
            s0 = _mm256_fmadd_pd(_mm256_loadu_pd(w0 + c), vx, s0);
            s1 = _mm256_fmadd_pd(_mm256_loadu_pd(w1 + c), vx, s1);
            s2 = _mm256_fmadd_pd(_mm256_loadu_pd(w2 + c), vx, s2);
            s3 = _mm256_fmadd_pd(_mm256_loadu_pd(w3 + c), vx, s3);
        }
        double t0 = hsum(s0), t1 = hsum(s1), t2 = hsum(s2), t3 = hsum(s3);
        for (; c < cols; ++c) {
            t0 += w0[c] * x[c];
            t1 += w1[c] * x[c];
            t2 += w2[c] * x[c];
            t3 += w3[c] * x[c];
        }
        y[r] += t0;
        y[r + 1] += t1;
        y[r + 2] += t2;
        y[r + 3] += t3;
    }
    for (; r < rows; ++r) y[r] += dot_avx2(W + r * cols, x, cols);
}

void gemv_t_avx2(const double *W, std::size_t rows, std::size_t cols,
                 const double *v, double *out) {
    for (std::size_t r = 0; r < rows; ++r) {
        if (v[r] == 0.0) continue;
        axpy_avx2(v[r], W + r * cols, out, cols);
    }
}

void ger_avx2(double *G, std::size_t rows, std::size_t cols, const double *u,
              const double *x) {
    for (std::size_t r = 0; r < rows; ++r) {
        if (u[r] == 0.0) continue;
        axpy_avx2(u[r], x, G + r * cols, cols);
    }
}

} // namespace

const KernelTable &avx2_table() {
    static const KernelTable table{Backend::Avx2, "avx2",    dot_avx2,
                                   axpy_avx2,     gemv_avx2, gemv_t_avx2,
                                   ger_avx2};
    return table;
}

} // namespace scribe::kernels

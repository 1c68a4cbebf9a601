#include "scribe/kernels.hpp"

namespace scribe::kernels {
namespace {

double dot_scalar(const double *x, const double *y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void axpy_scalar(double a, const double *x, double *y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void gemv_scalar(const double *W, std::size_t rows, std::size_t cols,
                 const double *x, double *y) {
    for (std::size_t r = 0; r < rows; ++r)
        y[r] += dot_scalar(W + r * cols, x, cols);
}

void gemv_t_scalar(const double *W, std::size_t rows, std::size_t cols,
                   const double *v, double *out) {
    for (std::size_t r = 0; r < rows; ++r) {
        if (v[r] == 0.0) continue;
        axpy_scalar(v[r], W + r * cols, out, cols);
    }
}

void ger_scalar(double *G, std::size_t rows, std::size_t cols, const double *u,
                const double *x) {
    for (std::size_t r = 0; r < rows; ++r) {
        if (u[r] == 0.0) continue;
        axpy_scalar(u[r], x, G + r * cols, cols);
    }
}

} // namespace

const KernelTable &scalar_table() {
    static const KernelTable table{Backend::Scalar, "scalar",  dot_scalar,
                                   axpy_scalar,     gemv_scalar, gemv_t_scalar,
                                   ger_scalar};
    return table;
}

} // namespace scribe::kernels

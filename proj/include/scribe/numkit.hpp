#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace scribe {

// ─── Errors ─────────────────────────────────────────────────────────────────

struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Non-finite value or overflow inside a numeric routine.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ─── Dense storage ──────────────────────────────────────────────────────────

using Vec = std::vector<double>;

// Row-major dense matrix with fixed dimensions.
class Mat {
  public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Mat(std::size_t rows, std::size_t cols, std::vector<double> data);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const {
        return {data_.data() + r * cols_, cols_};
    }

    double *data() { return data_.data(); }
    const double *data() const { return data_.data(); }
    const std::vector<double> &values() const { return data_; }

    bool operator==(const Mat &) const = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Non-owning row-major view into a parameter block.
struct MatView {
    double *data = nullptr;
    std::size_t rows = 0;
    std::size_t cols = 0;

    double &operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::size_t size() const { return rows * cols; }
    std::span<double> flat() const { return {data, rows * cols}; }
    // Rows [first, first + count).
    MatView row_block(std::size_t first, std::size_t count) const {
        return {data + first * cols, count, cols};
    }
};

struct ConstMatView {
    const double *data = nullptr;
    std::size_t rows = 0;
    std::size_t cols = 0;

    ConstMatView() = default;
    ConstMatView(const double *d, std::size_t r, std::size_t c) : data(d), rows(r), cols(c) {}
    ConstMatView(const MatView &v) : data(v.data), rows(v.rows), cols(v.cols) {}
    ConstMatView(const Mat &m) : data(m.data()), rows(m.rows()), cols(m.cols()) {}

    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::size_t size() const { return rows * cols; }
    std::span<const double> flat() const { return {data, rows * cols}; }
    ConstMatView row_block(std::size_t first, std::size_t count) const {
        return {data + first * cols, count, cols};
    }
};

// ─── Arithmetic ─────────────────────────────────────────────────────────────

// W x. Throws ShapeError when x.size() != W.cols.
Vec matvec(ConstMatView W, std::span<const double> x);

// Max-subtracted softmax; outputs are positive and sum to one.
Vec softmax_stable(std::span<const double> v);

// log(sum(exp(v))) via max subtraction. Returns -inf for an empty input.
double logsumexp(std::span<const double> v);

bool all_finite(std::span<const double> v);

inline double sigmoid(double x) {
    // Split on sign so exp never overflows.
    if (x >= 0.0) {
        const double z = std::exp(-x);
        return 1.0 / (1.0 + z);
    }
    const double z = std::exp(x);
    return z / (1.0 + z);
}

// ─── Random numbers ─────────────────────────────────────────────────────────

// Seedable generator whose stream is identical on every platform: the raw
// engine is mt19937_64 (fully specified by the standard) and all derived
// variates are computed here rather than through <random> distributions,
// whose algorithms are implementation-defined.
class Rng {
  public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }
    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // Uniform integer in [0, n).
    std::size_t uniform_index(std::size_t n);
    // Standard normal via the Box-Muller transform.
    double normal();
    double normal(double mean, double std) { return mean + std * normal(); }

  private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Draws an index with probability p[i]. p must be non-negative and sum to
// one within 1e-9; anything else throws std::invalid_argument.
std::size_t sample_categorical(std::span<const double> p, Rng &rng);

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

// Correlated bivariate normal:
//   x1 = mu1 + s1 z1,  x2 = mu2 + s2 (rho z1 + sqrt(1 - rho^2) z2).
// sigma must be non-negative (zero gives the mean) and |rho| < 1.
Point2 sample_bivariate_gaussian(Point2 mean, Point2 sigma, double rho, Rng &rng);

} // namespace scribe

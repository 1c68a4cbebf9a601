#include "scribe/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "scribe/kernels.hpp"

namespace scribe {

Mat::Mat(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols)
        throw ShapeError("Mat: data size " + std::to_string(data_.size()) +
                         " does not match " + std::to_string(rows) + "x" +
                         std::to_string(cols));
}

Vec matvec(ConstMatView W, std::span<const double> x) {
    if (x.size() != W.cols)
        throw ShapeError("matvec: matrix has " + std::to_string(W.cols) +
                         " columns but vector has " + std::to_string(x.size()) +
                         " entries");
    Vec y(W.rows, 0.0);
    kernels::gemv(W.data, W.rows, W.cols, x.data(), y.data());
    return y;
}

Vec softmax_stable(std::span<const double> v) {
    Vec out(v.size());
    if (v.empty()) return out;
    const double m = *std::max_element(v.begin(), v.end());
    double total = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = std::exp(v[i] - m);
        total += out[i];
    }
    for (double &o : out) o /= total;
    return out;
}

double logsumexp(std::span<const double> v) {
    if (v.empty()) return -std::numeric_limits<double>::infinity();
    const double m = *std::max_element(v.begin(), v.end());
    if (!std::isfinite(m)) return m;
    double total = 0.0;
    for (double x : v) total += std::exp(x - m);
    return m + std::log(total);
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

std::size_t Rng::uniform_index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: empty range");
    // Rejection sampling keeps the draw exactly uniform.
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() -
        std::numeric_limits<std::uint64_t>::max() % static_cast<std::uint64_t>(n);
    std::uint64_t r;
    do {
        r = engine_();
    } while (r >= limit);
    return static_cast<std::size_t>(r % n);
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

std::size_t sample_categorical(std::span<const double> p, Rng &rng) {
    if (p.empty()) throw std::invalid_argument("sample_categorical: empty distribution");
    double total = 0.0;
    for (double x : p) {
        if (!(x >= 0.0) || !std::isfinite(x))
            throw std::invalid_argument("sample_categorical: negative or non-finite probability");
        total += x;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("sample_categorical: probabilities sum to " +
                                    std::to_string(total));
    const double u = rng.uniform() * total;
    double cumulative = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) last_positive = i;
        cumulative += p[i];
        if (u < cumulative && p[i] > 0.0) return i;
    }
    return last_positive;
}

Point2 sample_bivariate_gaussian(Point2 mean, Point2 sigma, double rho, Rng &rng) {
    if (!(std::abs(rho) < 1.0))
        throw std::invalid_argument("sample_bivariate_gaussian: |rho| must be < 1");
    if (!(sigma.x >= 0.0) || !(sigma.y >= 0.0))
        throw std::invalid_argument("sample_bivariate_gaussian: sigma must be >= 0");
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    return {mean.x + sigma.x * z1,
            mean.y + sigma.y * (rho * z1 + std::sqrt(1.0 - rho * rho) * z2)};
}

} // namespace scribe

#include "scribe/window.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "scribe/network.hpp"

namespace scribe {

void CharSeq::validate() const {
    for (int c : indices)
        if (c < 0 || c >= alphabet_size)
            throw std::invalid_argument("CharSeq: index " + std::to_string(c) +
                                        " outside alphabet of size " +
                                        std::to_string(alphabet_size));
}

Mat CharSeq::one_hot() const {
    Mat m(static_cast<std::size_t>(alphabet_size), indices.size());
    for (std::size_t u = 0; u < indices.size(); ++u)
        m(static_cast<std::size_t>(indices[u]), u) = 1.0;
    return m;
}

namespace {

double checked_exp(double v, const char *what, std::size_t k) {
    const double e = std::exp(v);
    if (!std::isfinite(e))
        throw NumericError(std::string("window: exp overflow in ") + what + "[" +
                           std::to_string(k) + "] = " + std::to_string(v));
    return e;
}

} // namespace

WindowCache window_step(std::span<const double> p_hat, std::span<const double> kappa_prev,
                        const CharSeq &chars) {
    const std::size_t K = kappa_prev.size();
    if (p_hat.size() != 3 * K)
        throw ShapeError("window_step: expected " + std::to_string(3 * K) +
                         " window parameters, got " + std::to_string(p_hat.size()));
    const std::size_t U = chars.size();
    WindowCache wc;
    wc.alpha.resize(K);
    wc.beta.resize(K);
    wc.kappa.resize(K);
    wc.kappa_step.resize(K);
    wc.kappa_clamped.assign(K, false);
    for (std::size_t k = 0; k < K; ++k) {
        wc.alpha[k] = checked_exp(p_hat[k], "alpha_hat", k);
        wc.beta[k] = checked_exp(p_hat[K + k], "beta_hat", k);
        double kh = p_hat[2 * K + k];
        if (kh > kKappaHatLimit) {
            static bool warned = false;
            if (!warned) {
                std::fprintf(stderr, "warning: kappa_hat %.3g clamped to %.0f\n", kh,
                             kKappaHatLimit);
                warned = true;
            }
            kh = kKappaHatLimit;
            wc.kappa_clamped[k] = true;
        }
        wc.kappa_step[k] = std::exp(kh);
        wc.kappa[k] = kappa_prev[k] + wc.kappa_step[k];
    }
    wc.phi.assign(U + 1, 0.0);
    for (std::size_t u = 1; u <= U + 1; ++u) {
        double s = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            const double d = wc.kappa[k] - static_cast<double>(u);
            s += wc.alpha[k] * std::exp(-wc.beta[k] * d * d);
        }
        wc.phi[u - 1] = s;
    }
    wc.w.assign(static_cast<std::size_t>(chars.alphabet_size), 0.0);
    for (std::size_t u = 0; u < U; ++u)
        wc.w[static_cast<std::size_t>(chars.indices[u])] += wc.phi[u];
    return wc;
}

WindowGrad window_backward(const WindowCache &cache, std::span<const double> dw,
                           std::span<const double> dkappa_next, const CharSeq &chars) {
    const std::size_t K = cache.alpha.size();
    const std::size_t U = chars.size();
    if (dkappa_next.size() != K || dw.size() != static_cast<std::size_t>(chars.alphabet_size))
        throw ShapeError("window_backward: gradient sizes do not match the cache");
    WindowGrad g;
    g.dp_hat.assign(3 * K, 0.0);
    g.dkappa.assign(K, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
        const double alpha = cache.alpha[k];
        const double beta = cache.beta[k];
        const double kappa = cache.kappa[k];
        double sum_eps = 0.0, sum_sq = 0.0, sum_lin = 0.0;
        for (std::size_t u = 1; u <= U; ++u) {
            const double du = kappa - static_cast<double>(u);
            // eps(k,t,u) = alpha exp(-beta (kappa-u)^2) * <dL/dw, c_u>
            const double eps = alpha * std::exp(-beta * du * du) *
                               dw[static_cast<std::size_t>(chars.indices[u - 1])];
            sum_eps += eps;
            sum_sq += eps * du * du;
            sum_lin += eps * (-du);
        }
        g.dp_hat[k] = sum_eps;
        g.dp_hat[K + k] = -beta * sum_sq;
        g.dkappa[k] = dkappa_next[k] + 2.0 * beta * sum_lin;
        g.dp_hat[2 * K + k] = cache.kappa_clamped[k] ? 0.0 : cache.kappa_step[k] * g.dkappa[k];
    }
    return g;
}

bool stop_check(std::span<const double> phi_with_end) {
    if (phi_with_end.empty()) return false;
    const double end = phi_with_end.back();
    for (std::size_t u = 0; u + 1 < phi_with_end.size(); ++u)
        if (!(end > phi_with_end[u])) return false;
    return true;
}

ForwardResult synth_forward(const ParamStore &params, const Mat &x_seq, const CharSeq &chars,
                            const NetworkState &init) {
    if (!params.arch().has_window)
        throw std::invalid_argument("synth_forward: architecture has no window");
    return network_forward(params, x_seq, &chars, init);
}

BackwardResult synth_backward(const ParamStore &params, const ForwardCache &cache,
                              const Mat &dyhat, ClipRange clip) {
    return network_backward(params, cache, dyhat, clip);
}

} // namespace scribe

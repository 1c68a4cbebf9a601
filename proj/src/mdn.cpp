#include "scribe/mdn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace scribe {
namespace {

// log(1 + exp(x)) without overflow.
double softplus(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

double squash_rho(double rho_hat) {
    return std::clamp(std::tanh(rho_hat), -kRhoLimit, kRhoLimit);
}

bool rho_clamped(double rho_hat) { return std::abs(std::tanh(rho_hat)) > kRhoLimit; }

MixtureOut squash(std::span<const double> yhat, int components, double bias) {
    if (components < 1) throw std::invalid_argument("mixture needs at least one component");
    const MdnSlots s{static_cast<std::size_t>(components)};
    if (yhat.size() != s.size())
        throw ShapeError("mixture output has " + std::to_string(yhat.size()) +
                         " values, expected " + std::to_string(s.size()));
    const std::size_t M = s.M;
    MixtureOut mix;
    // e = 1/(1 + exp(e_hat)) = sigmoid(-e_hat)
    mix.e = sigmoid(-yhat[s.eos()]);
    mix.e_hat = yhat[s.eos()];
    mix.pi.resize(M);
    mix.log_pi.resize(M);
    mix.mu1.resize(M);
    mix.mu2.resize(M);
    mix.sigma1.resize(M);
    mix.sigma2.resize(M);
    mix.rho.resize(M);

    Vec logits(M);
    if (std::isinf(bias)) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < M; ++j)
            if (yhat[s.pi(j)] > yhat[s.pi(best)]) best = j;
        for (std::size_t j = 0; j < M; ++j) {
            mix.pi[j] = j == best ? 1.0 : 0.0;
            mix.log_pi[j] = j == best ? 0.0 : -std::numeric_limits<double>::infinity();
        }
    } else {
        for (std::size_t j = 0; j < M; ++j) logits[j] = yhat[s.pi(j)] * (1.0 + bias);
        const double lse = logsumexp(logits);
        for (std::size_t j = 0; j < M; ++j) {
            mix.log_pi[j] = logits[j] - lse;
            mix.pi[j] = std::exp(mix.log_pi[j]);
        }
    }
    for (std::size_t j = 0; j < M; ++j) {
        mix.mu1[j] = yhat[s.mu1(j)];
        mix.mu2[j] = yhat[s.mu2(j)];
        mix.sigma1[j] = std::exp(yhat[s.sigma1(j)] - bias);
        mix.sigma2[j] = std::exp(yhat[s.sigma2(j)] - bias);
        mix.rho[j] = squash_rho(yhat[s.rho(j)]);
    }
    return mix;
}

} // namespace

MixtureOut split_outputs(std::span<const double> yhat, int components) {
    return squash(yhat, components, 0.0);
}

MixtureOut apply_bias(std::span<const double> yhat, int components, double bias) {
    if (!(bias >= 0.0)) throw std::invalid_argument("apply_bias: bias must be >= 0");
    return squash(yhat, components, bias);
}

double bivariate_logdensity(Point2 x, Point2 mu, Point2 sigma, double rho) {
    const double d1 = (x.x - mu.x) / sigma.x;
    const double d2 = (x.y - mu.y) / sigma.y;
    const double one_m_r2 = 1.0 - rho * rho;
    const double Z = d1 * d1 + d2 * d2 - 2.0 * rho * d1 * d2;
    return -std::log(2.0 * std::numbers::pi * sigma.x * sigma.y * std::sqrt(one_m_r2)) -
           Z / (2.0 * one_m_r2);
}

double mixture_density(const MixtureOut &mix, Point2 x) {
    double total = 0.0;
    for (std::size_t j = 0; j < mix.components(); ++j) {
        if (mix.pi[j] == 0.0) continue;
        total += mix.pi[j] * std::exp(bivariate_logdensity(x, {mix.mu1[j], mix.mu2[j]},
                                                           {mix.sigma1[j], mix.sigma2[j]},
                                                           mix.rho[j]));
    }
    return total;
}

MdnStepResult mdn_step_loss(const MixtureOut &mix, const StrokePoint &x_next) {
    const std::size_t M = mix.components();
    MdnStepResult r;
    r.cache.Z.resize(M);
    r.cache.C.resize(M);
    Vec terms(M);
    for (std::size_t j = 0; j < M; ++j) {
        const double d1 = (x_next.dx - mix.mu1[j]) / mix.sigma1[j];
        const double d2 = (x_next.dy - mix.mu2[j]) / mix.sigma2[j];
        const double rho = mix.rho[j];
        r.cache.Z[j] = d1 * d1 + d2 * d2 - 2.0 * rho * d1 * d2;
        r.cache.C[j] = 1.0 / (1.0 - rho * rho);
        const double log_pi = mix.log_pi.empty() ? std::log(mix.pi[j]) : mix.log_pi[j];
        terms[j] = log_pi + bivariate_logdensity({x_next.dx, x_next.dy},
                                                 {mix.mu1[j], mix.mu2[j]},
                                                 {mix.sigma1[j], mix.sigma2[j]}, rho);
    }
    const double log_mix = logsumexp(terms);
    r.cache.gamma.resize(M);
    for (std::size_t j = 0; j < M; ++j) r.cache.gamma[j] = std::exp(terms[j] - log_mix);

    // e = sigmoid(-e_hat): log e = -softplus(e_hat), log(1-e) = -softplus(-e_hat).
    double bernoulli;
    if (std::isfinite(mix.e_hat))
        bernoulli = x_next.eos == 1 ? softplus(mix.e_hat) : softplus(-mix.e_hat);
    else
        bernoulli = x_next.eos == 1 ? -std::log(mix.e) : -std::log1p(-mix.e);
    r.loss = -log_mix + bernoulli;
    return r;
}

Vec mdn_backward(const MixtureOut &mix, const MdnBackCache &cache, const StrokePoint &x_next) {
    const std::size_t M = mix.components();
    const MdnSlots s{M};
    Vec d(s.size(), 0.0);
    d[s.eos()] = static_cast<double>(x_next.eos) - mix.e;
    for (std::size_t j = 0; j < M; ++j) {
        const double gamma = cache.gamma[j];
        const double rho = mix.rho[j];
        const double C = cache.C[j];
        const double d1 = (x_next.dx - mix.mu1[j]) / mix.sigma1[j];
        const double d2 = (x_next.dy - mix.mu2[j]) / mix.sigma2[j];
        const double a1 = d1 - rho * d2;
        const double a2 = d2 - rho * d1;
        d[s.pi(j)] = mix.pi[j] - gamma;
        d[s.mu1(j)] = -gamma * C / mix.sigma1[j] * a1;
        d[s.mu2(j)] = -gamma * C / mix.sigma2[j] * a2;
        d[s.sigma1(j)] = -gamma * (C * d1 * a1 - 1.0);
        d[s.sigma2(j)] = -gamma * (C * d2 * a2 - 1.0);
        d[s.rho(j)] = -gamma * (d1 * d2 + rho * (1.0 - C * cache.Z[j]));
    }
    return d;
}

double mdn_sequence_loss(const Mat &yhat, std::span<const StrokePoint> targets, int components,
                         Mat *dyhat) {
    if (yhat.rows() != targets.size())
        throw ShapeError("mdn_sequence_loss: " + std::to_string(yhat.rows()) +
                         " outputs for " + std::to_string(targets.size()) + " targets");
    if (dyhat) *dyhat = Mat(yhat.rows(), yhat.cols());
    const MdnSlots s{static_cast<std::size_t>(components)};
    double total = 0.0;
    for (std::size_t t = 0; t < targets.size(); ++t) {
        const auto row = yhat.row(t);
        const MixtureOut mix = split_outputs(row, components);
        MdnStepResult r = mdn_step_loss(mix, targets[t]);
        total += r.loss;
        if (dyhat) {
            Vec d = mdn_backward(mix, r.cache, targets[t]);
            for (std::size_t j = 0; j < s.M; ++j)
                if (rho_clamped(row[s.rho(j)])) d[s.rho(j)] = 0.0;
            std::copy(d.begin(), d.end(), dyhat->row(t).begin());
        }
    }
    return total;
}

StrokePoint mdn_sample(const MixtureOut &mix, Rng &rng) {
    const std::size_t j = sample_categorical(mix.pi, rng);
    const Point2 p = sample_bivariate_gaussian({mix.mu1[j], mix.mu2[j]},
                                               {mix.sigma1[j], mix.sigma2[j]}, mix.rho[j], rng);
    const int eos = rng.uniform() < mix.e ? 1 : 0;
    return {p.x, p.y, eos};
}

} // namespace scribe

#include "scribe/optim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace scribe {

void rmsprop_step(RmspropState &s, std::span<double> w, std::span<const double> grad,
                  const RmspropHyper &h) {
    if (w.size() != grad.size() || s.size() != w.size())
        throw ShapeError("rmsprop_step: state, weights and gradient sizes differ");
    const double a = h.decay;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double e = grad[i];
        s.n[i] = a * s.n[i] + (1.0 - a) * e * e;
        s.g[i] = a * s.g[i] + (1.0 - a) * e;
        const double radicand = s.n[i] - s.g[i] * s.g[i] + h.epsilon;
        if (!(radicand > 0.0))
            throw NumericError("rmsprop_step: non-positive radicand at parameter " +
                               std::to_string(i));
        s.delta[i] = h.momentum * s.delta[i] - h.learning_rate * e / std::sqrt(radicand);
        w[i] += s.delta[i];
    }
}

void sgd_momentum_step(Vec &velocity, std::span<double> w, std::span<const double> grad,
                       double lr, double momentum) {
    if (w.size() != grad.size() || velocity.size() != w.size())
        throw ShapeError("sgd_momentum_step: velocity, weights and gradient sizes differ");
    for (std::size_t i = 0; i < w.size(); ++i) {
        velocity[i] = momentum * velocity[i] - lr * grad[i];
        w[i] += velocity[i];
    }
}

void clip_elementwise(std::span<double> v, double lo, double hi) {
    if (lo > hi) throw std::invalid_argument("clip_elementwise: lo > hi");
    for (double &x : v) x = std::min(std::max(x, lo), hi);
}

std::string_view optimizer_name(OptimizerKind k) {
    return k == OptimizerKind::Rmsprop ? "rmsprop" : "momentum";
}

OptimizerKind parse_optimizer(std::string_view name) {
    if (name == "rmsprop") return OptimizerKind::Rmsprop;
    if (name == "momentum" || name == "sgd") return OptimizerKind::Momentum;
    throw std::invalid_argument("unknown optimizer '" + std::string(name) + "'");
}

Optimizer::Optimizer(const OptimizerConfig &cfg, std::size_t size) : config(cfg) {
    if (cfg.kind == OptimizerKind::Rmsprop)
        rms = RmspropState(size);
    else
        velocity.assign(size, 0.0);
}

void Optimizer::step(std::span<double> weights, std::span<const double> grad) {
    if (config.kind == OptimizerKind::Rmsprop)
        rmsprop_step(rms, weights, grad, config.rmsprop);
    else
        sgd_momentum_step(velocity, weights, grad, config.learning_rate, config.momentum);
    ++steps;
}

void Optimizer::reset() {
    const std::size_t n = size();
    *this = Optimizer(config, n);
}

std::size_t Optimizer::size() const {
    return config.kind == OptimizerKind::Rmsprop ? rms.size() : velocity.size();
}

} // namespace scribe

#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include "scribe/numkit.hpp"

namespace scribe {

// Centred RMSProp with momentum:
//   n = decay n + (1 - decay) g^2
//   m = decay m + (1 - decay) g
//   d = momentum d - learning_rate g / sqrt(n - m^2 + epsilon)
//   w = w + d
struct RmspropHyper {
    double decay = 0.95;
    double momentum = 0.9;
    double learning_rate = 1e-4;
    double epsilon = 1e-4;
};

struct RmspropState {
    Vec n;     // running mean of squared gradients
    Vec g;     // running mean of gradients
    Vec delta; // momentum buffer

    RmspropState() = default;
    explicit RmspropState(std::size_t size) : n(size, 0.0), g(size, 0.0), delta(size, 0.0) {}
    std::size_t size() const { return n.size(); }
};

// Throws NumericError on a negative radicand and ShapeError on size mismatch.
void rmsprop_step(RmspropState &state, std::span<double> weights, std::span<const double> grad,
                  const RmspropHyper &h = {});

// v = momentum v - lr g;  w = w + v.
void sgd_momentum_step(Vec &velocity, std::span<double> weights, std::span<const double> grad,
                       double lr, double momentum);

// In-place min(max(v, lo), hi). Throws std::invalid_argument when lo > hi.
void clip_elementwise(std::span<double> v, double lo, double hi);

enum class OptimizerKind { Rmsprop, Momentum };

std::string_view optimizer_name(OptimizerKind k);
OptimizerKind parse_optimizer(std::string_view name);

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::Rmsprop;
    RmspropHyper rmsprop;
    double learning_rate = 1e-4; // momentum SGD
    double momentum = 0.9;       // momentum SGD
};

// Optimizer plus its per-parameter state; serialised with checkpoints.
struct Optimizer {
    OptimizerConfig config;
    RmspropState rms;
    Vec velocity;
    std::uint64_t steps = 0;

    Optimizer() = default;
    Optimizer(const OptimizerConfig &cfg, std::size_t size);

    void step(std::span<double> weights, std::span<const double> grad);
    void reset();
    std::size_t size() const;
};

} // namespace scribe

#pragma once

#include <span>

#include "scribe/lstm.hpp"
#include "scribe/window.hpp"

namespace scribe {

struct StepCache {
    std::vector<CellCache> layers;
    WindowCache window;
};

// Advances the network by one timestep from `state`, writing yhat_t and the
// step's activations. `chars` must be non-null for window networks; `t` is
// only used in error messages.
void network_step(const ParamStore &params, std::span<const double> x, const CharSeq *chars,
                  NetworkState &state, StepCache &cache, std::span<double> yhat,
                  std::size_t t = 0);

// Sequence forward / backward shared by the plain stack and the window net.
ForwardResult network_forward(const ParamStore &params, const Mat &x_seq, const CharSeq *chars,
                              const NetworkState &init);
BackwardResult network_backward(const ParamStore &params, const ForwardCache &cache,
                                const Mat &dyhat, ClipRange clip);

} // namespace scribe

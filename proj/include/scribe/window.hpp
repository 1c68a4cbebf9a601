#pragma once

#include <span>
#include <vector>

#include "scribe/lstm.hpp"
#include "scribe/numkit.hpp"
#include "scribe/params.hpp"

namespace scribe {

// Character string as one-hot columns, stored by index. Column u has a single
// one at row indices[u].
struct CharSeq {
    std::vector<int> indices;
    int alphabet_size = 0;

    std::size_t size() const { return indices.size(); }
    // Throws std::invalid_argument if an index is outside the alphabet.
    void validate() const;
    Mat one_hot() const; // alphabet x U
};

// Largest kappa_hat fed to exp(); larger values are clamped (and their
// gradient is zero).
inline constexpr double kKappaHatLimit = 50.0;

// Window parameters and weights at one timestep.
struct WindowCache {
    Vec alpha, beta, kappa; // K each
    Vec kappa_step;         // exp(kappa_hat), after clamping
    std::vector<bool> kappa_clamped;
    Vec phi;                // U + 1 entries; phi[u-1] is the weight of character u
    Vec w;                  // alphabet entries
};

// p_hat = (alpha_hat, beta_hat, kappa_hat), each K long.
//   alpha = exp(alpha_hat), beta = exp(beta_hat), kappa = kappa_prev + exp(kappa_hat)
//   phi(u) = sum_k alpha_k exp(-beta_k (kappa_k - u)^2),   u = 1..U+1
//   w      = sum_{u<=U} phi(u) c_u
// Throws NumericError naming the parameter when an exponential overflows.
WindowCache window_step(std::span<const double> p_hat, std::span<const double> kappa_prev,
                        const CharSeq &chars);

struct WindowGrad {
    Vec dp_hat;     // 3K: (d alpha_hat, d beta_hat, d kappa_hat)
    Vec dkappa;     // dL/dkappa_t, to be passed to step t-1
};

// Gradients of the window parameters given dL/dw_t and dL/dkappa_{t+1}.
WindowGrad window_backward(const WindowCache &cache, std::span<const double> dw,
                           std::span<const double> dkappa_next, const CharSeq &chars);

// True iff phi(U+1) strictly exceeds phi(u) for every 1 <= u <= U.
bool stop_check(std::span<const double> phi_with_end);

// Forward pass of a window network: layer 0 reads w_{t-1}, higher layers read
// w_t, and the window parameters come from layer 0 at time t. The initial
// state carries kappa_0 and w_0 (zero for a fresh sequence).
ForwardResult synth_forward(const ParamStore &params, const Mat &x_seq, const CharSeq &chars,
                            const NetworkState &init);

BackwardResult synth_backward(const ParamStore &params, const ForwardCache &cache,
                              const Mat &dyhat, ClipRange clip = {});

} // namespace scribe

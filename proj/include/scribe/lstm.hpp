#pragma once

#include <limits>
#include <span>
#include <vector>

#include "scribe/numkit.hpp"
#include "scribe/params.hpp"

namespace scribe {

struct CharSeq;
struct WindowCache;

// ─── LSTM cell ──────────────────────────────────────────────────────────────

// Hidden and cell activations of one layer, carried across timesteps and,
// for stateful training, across sequences.
struct LayerState {
    Vec h;
    Vec c;
};

// Activations of one cell step, enough to replay the step exactly.
// c_{t-1} and h_{t-1} live in the previous step's cache (or the initial
// state), so they are not duplicated here.
struct CellCache {
    Vec i, f, g, o; // gates and cell input, after their nonlinearities
    Vec c, tanh_c, h;
};

// One weighted input source feeding the gates: preact += weights * values.
struct CellInput {
    ConstMatView weights; // 4H x values.size()
    std::span<const double> values;
};

// Recurrent part of a cell block. Peephole weights are diagonal.
struct CellParams {
    ConstMatView recurrent; // 4H x H
    std::span<const double> bias;        // 4H
    std::span<const double> peep_input;  // H
    std::span<const double> peep_forget; // H
    std::span<const double> peep_output; // H
};

CellParams cell_params(const ParamStore &params, int layer);

// Peephole LSTM step:
//   i = s(Wx_i x + Wh_i h' + p_i * c' + b_i)
//   f = s(Wx_f x + Wh_f h' + p_f * c' + b_f)
//   c = f * c' + i * tanh(Wx_c x + Wh_c h' + b_c)
//   o = s(Wx_o x + Wh_o h' + p_o * c  + b_o)     (uses the new c)
//   h = o * tanh(c)
// Writes the new activations into `out` and returns the new state.
LayerState lstm_cell_step(const CellParams &p, std::span<const CellInput> inputs,
                          const LayerState &prev, CellCache &out);

// ─── Whole-network state and caches ─────────────────────────────────────────

struct NetworkState {
    std::vector<LayerState> layers;
    Vec kappa;  // window locations (window nets only)
    Vec window; // last window vector w_{t-1} (window nets only)
};

NetworkState initial_state(const Architecture &arch);

struct StepCache;

struct ForwardCache {
    NetworkState initial;
    Mat inputs;                  // T x input_size
    std::vector<StepCache> steps;
    std::vector<int> chars;      // character indices (window nets)
    int alphabet_size = 0;
    std::size_t length() const;
};

struct ForwardResult {
    Mat yhat;                 // T x output_size
    NetworkState final_state; // carried into the next sequence when stateful
    ForwardCache cache;
};

// Bounds applied elementwise to the derivatives w.r.t. LSTM pre-activations.
struct ClipRange {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool active() const {
        return lo != -std::numeric_limits<double>::infinity() ||
               hi != std::numeric_limits<double>::infinity();
    }
};

struct BackwardResult {
    ParamStore grad;
    NetworkState dinitial; // derivatives w.r.t. the initial (h, c, kappa, w)
    Mat dwindow;           // T x alphabet, dL/dw_t (window nets)
};

// Forward pass of a window-free stack: h^n_t from x_t, h^{n-1}_t and
// h^n_{t-1}; yhat_t = b_y + sum_n W_{h^n y} h^n_t. An empty sequence yields
// empty outputs and an unchanged state.
ForwardResult stack_forward(const ParamStore &params, const Mat &x_seq,
                            const NetworkState &init);

// Full-gradient BPTT for stack_forward. The derivatives w.r.t. every LSTM
// pre-activation are clipped to `clip` before they propagate further.
BackwardResult stack_backward(const ParamStore &params, const ForwardCache &cache,
                              const Mat &dyhat, ClipRange clip = {});

} // namespace scribe

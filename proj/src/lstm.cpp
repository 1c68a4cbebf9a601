#include "scribe/lstm.hpp"

#include <cmath>

#include "scribe/kernels.hpp"
#include "scribe/network.hpp"

namespace scribe {

std::size_t ForwardCache::length() const { return steps.size(); }

CellParams cell_params(const ParamStore &params, int layer) {
    const LayerLayout &L = params.layout().layers.at(static_cast<std::size_t>(layer));
    return {params.view(L.w_recurrent), params.view(L.bias).flat(),
            params.view(L.peep_input).flat(), params.view(L.peep_forget).flat(),
            params.view(L.peep_output).flat()};
}

LayerState lstm_cell_step(const CellParams &p, std::span<const CellInput> inputs,
                          const LayerState &prev, CellCache &out) {
    const std::size_t H = p.peep_input.size();
    if (prev.h.size() != H || prev.c.size() != H || p.recurrent.rows != 4 * H ||
        p.recurrent.cols != H || p.bias.size() != 4 * H)
        throw ShapeError("lstm_cell_step: state or weights do not match width " +
                         std::to_string(H));

    Vec a(p.bias.begin(), p.bias.end());
    for (const CellInput &in : inputs) {
        if (in.weights.cols == 0) continue;
        if (in.weights.rows != 4 * H || in.weights.cols != in.values.size())
            throw ShapeError("lstm_cell_step: input block is " +
                             std::to_string(in.weights.rows) + "x" +
                             std::to_string(in.weights.cols) + " for " +
                             std::to_string(in.values.size()) + " values");
        kernels::gemv(in.weights.data, in.weights.rows, in.weights.cols, in.values.data(),
                      a.data());
    }
    kernels::gemv(p.recurrent.data, 4 * H, H, prev.h.data(), a.data());

    out.i.resize(H);
    out.f.resize(H);
    out.g.resize(H);
    out.o.resize(H);
    out.c.resize(H);
    out.tanh_c.resize(H);
    out.h.resize(H);
    const double *ai = a.data();
    const double *af = ai + H;
    const double *ag = af + H;
    const double *ao = ag + H;
    for (std::size_t m = 0; m < H; ++m) {
        const double cp = prev.c[m];
        out.i[m] = sigmoid(ai[m] + p.peep_input[m] * cp);
        out.f[m] = sigmoid(af[m] + p.peep_forget[m] * cp);
        out.g[m] = std::tanh(ag[m]);
        out.c[m] = out.f[m] * cp + out.i[m] * out.g[m];
        out.o[m] = sigmoid(ao[m] + p.peep_output[m] * out.c[m]);
        out.tanh_c[m] = std::tanh(out.c[m]);
        out.h[m] = out.o[m] * out.tanh_c[m];
    }
    return {out.h, out.c};
}

NetworkState initial_state(const Architecture &arch) {
    NetworkState s;
    for (int w : arch.layer_widths)
        s.layers.push_back({Vec(static_cast<std::size_t>(w), 0.0),
                            Vec(static_cast<std::size_t>(w), 0.0)});
    if (arch.has_window) {
        s.kappa.assign(static_cast<std::size_t>(arch.window_components), 0.0);
        s.window.assign(static_cast<std::size_t>(arch.alphabet_size), 0.0);
    }
    return s;
}

ForwardResult stack_forward(const ParamStore &params, const Mat &x_seq,
                            const NetworkState &init) {
    if (params.arch().has_window)
        throw std::invalid_argument("stack_forward: window networks need synth_forward");
    return network_forward(params, x_seq, nullptr, init);
}

BackwardResult stack_backward(const ParamStore &params, const ForwardCache &cache,
                              const Mat &dyhat, ClipRange clip) {
    return network_backward(params, cache, dyhat, clip);
}

} // namespace scribe

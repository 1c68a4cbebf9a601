#include "scribe/network.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "scribe/kernels.hpp"

namespace scribe {
namespace {

std::span<const double> empty_span() { return {}; }

void check_finite(std::span<const double> v, const char *what, std::size_t t, int layer) {
    if (!all_finite(v))
        throw NumericError(std::string("non-finite ") + what + " at timestep " +
                           std::to_string(t) +
                           (layer >= 0 ? " in layer " + std::to_string(layer) : std::string()));
}

void check_state(const Architecture &arch, const NetworkState &s) {
    if (s.layers.size() != static_cast<std::size_t>(arch.num_layers()))
        throw ShapeError("network state has " + std::to_string(s.layers.size()) +
                         " layers, architecture has " + std::to_string(arch.num_layers()));
    for (int n = 0; n < arch.num_layers(); ++n) {
        const auto H = static_cast<std::size_t>(arch.layer_widths[n]);
        if (s.layers[n].h.size() != H || s.layers[n].c.size() != H)
            throw ShapeError("network state layer " + std::to_string(n) + " has wrong width");
    }
    if (arch.has_window &&
        (s.kappa.size() != static_cast<std::size_t>(arch.window_components) ||
         s.window.size() != static_cast<std::size_t>(arch.alphabet_size)))
        throw ShapeError("network state window vectors have wrong size");
}

} // namespace

void network_step(const ParamStore &params, std::span<const double> x, const CharSeq *chars,
                  NetworkState &state, StepCache &cache, std::span<double> yhat, std::size_t t) {
    const ParamLayout &L = params.layout();
    const Architecture &arch = L.arch;
    const int N = arch.num_layers();
    if (x.size() != static_cast<std::size_t>(arch.input_size))
        throw ShapeError("network_step: input has " + std::to_string(x.size()) +
                         " entries, expected " + std::to_string(arch.input_size));
    if (yhat.size() != static_cast<std::size_t>(arch.output_size))
        throw ShapeError("network_step: output buffer has wrong size");
    if (arch.has_window && chars == nullptr)
        throw std::invalid_argument("network_step: window network needs a character sequence");
    if (arch.has_window && chars->alphabet_size != arch.alphabet_size)
        throw ShapeError("network_step: character alphabet does not match architecture");

    cache.layers.resize(static_cast<std::size_t>(N));
    for (int n = 0; n < N; ++n) {
        const LayerLayout &LL = L.layers[n];
        std::array<CellInput, 3> inputs{};
        std::size_t count = 0;
        inputs[count++] = {params.view(LL.w_input), x};
        if (n > 0)
            inputs[count++] = {params.view(LL.w_below), state.layers[n - 1].h};
        if (arch.has_window) {
            // Layer 0 sees w_{t-1} (still in state.window); the rest see w_t.
            inputs[count++] = {params.view(LL.w_window), state.window};
        }
        state.layers[n] = lstm_cell_step(cell_params(params, n),
                                         std::span<const CellInput>(inputs.data(), count),
                                         state.layers[n], cache.layers[n]);
        check_finite(state.layers[n].h, "hidden activation", t, n);
        check_finite(state.layers[n].c, "cell activation", t, n);

        if (n == 0 && arch.has_window) {
            Vec p_hat(params.view(L.window_bias).flat().begin(),
                      params.view(L.window_bias).flat().end());
            const ConstMatView Wp = params.view(L.window_weights);
            kernels::gemv(Wp.data, Wp.rows, Wp.cols, state.layers[0].h.data(), p_hat.data());
            cache.window = window_step(p_hat, state.kappa, *chars);
            state.kappa = cache.window.kappa;
            state.window = cache.window.w;
        }
    }

    const auto bias = params.view(L.output_bias).flat();
    std::copy(bias.begin(), bias.end(), yhat.begin());
    for (int n = 0; n < N; ++n) {
        const ConstMatView Wy = params.view(L.layers[n].w_output);
        kernels::gemv(Wy.data, Wy.rows, Wy.cols, state.layers[n].h.data(), yhat.data());
    }
    check_finite(yhat, "output", t, -1);
}

ForwardResult network_forward(const ParamStore &params, const Mat &x_seq, const CharSeq *chars,
                              const NetworkState &init) {
    const Architecture &arch = params.arch();
    check_state(arch, init);
    if (x_seq.size() > 0 && x_seq.cols() != static_cast<std::size_t>(arch.input_size))
        throw ShapeError("network_forward: inputs have " + std::to_string(x_seq.cols()) +
                         " columns, expected " + std::to_string(arch.input_size));
    if (arch.has_window) {
        if (chars == nullptr)
            throw std::invalid_argument("network_forward: window network needs characters");
        if (chars->size() < 1)
            throw std::invalid_argument("network_forward: character sequence must be non-empty");
        chars->validate();
    }

    const std::size_t T = x_seq.rows();
    ForwardResult r;
    r.yhat = Mat(T, static_cast<std::size_t>(arch.output_size));
    r.cache.initial = init;
    r.cache.inputs = x_seq;
    if (chars) {
        r.cache.chars = chars->indices;
        r.cache.alphabet_size = chars->alphabet_size;
    }
    r.cache.steps.resize(T);
    NetworkState state = init;
    for (std::size_t t = 0; t < T; ++t)
        network_step(params, x_seq.row(t), chars, state, r.cache.steps[t], r.yhat.row(t), t);
    r.final_state = std::move(state);
    return r;
}

namespace {

// Backward through one cell. On entry dh holds dL/dh_t and dc_next holds the
// cell-state derivative arriving from t+1. Returns the pre-activation
// derivatives (4H, clipped) and writes dL/dc_{t-1} into dc_prev.
void cell_backward(const CellParams &p, const CellCache &cc, std::span<const double> c_prev,
                   std::span<const double> dh, std::span<const double> dc_next, ClipRange clip,
                   Vec &da, Vec &dc_prev) {
    const std::size_t H = cc.h.size();
    da.assign(4 * H, 0.0);
    dc_prev.assign(H, 0.0);
    double *dai = da.data();
    double *daf = dai + H;
    double *dag = daf + H;
    double *dao = dag + H;
    auto clamp = [&](double v) { return std::min(std::max(v, clip.lo), clip.hi); };
    for (std::size_t m = 0; m < H; ++m) {
        const double o = cc.o[m], i = cc.i[m], f = cc.f[m], g = cc.g[m];
        const double tc = cc.tanh_c[m];
        dao[m] = clamp(dh[m] * tc * o * (1.0 - o));
        const double dc = dc_next[m] + dh[m] * o * (1.0 - tc * tc) + dao[m] * p.peep_output[m];
        dai[m] = clamp(dc * g * i * (1.0 - i));
        dag[m] = clamp(dc * i * (1.0 - g * g));
        daf[m] = clamp(dc * c_prev[m] * f * (1.0 - f));
        dc_prev[m] = dc * f + dai[m] * p.peep_input[m] + daf[m] * p.peep_forget[m];
    }
}

void add_outer(ParamStore &grad, const ViewInfo &v, std::span<const double> u,
               std::span<const double> x) {
    if (v.cols == 0) return;
    kernels::ger(grad.view(v).data, v.rows, v.cols, u.data(), x.data());
}

void add_to(std::span<double> dst, std::span<const double> src) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

} // namespace

BackwardResult network_backward(const ParamStore &params, const ForwardCache &cache,
                                const Mat &dyhat, ClipRange clip) {
    const ParamLayout &L = params.layout();
    const Architecture &arch = L.arch;
    const int N = arch.num_layers();
    const std::size_t T = cache.length();
    if (dyhat.rows() != T || (T > 0 && dyhat.cols() != static_cast<std::size_t>(arch.output_size)))
        throw ShapeError("network_backward: output derivatives do not match the cache");
    if (cache.inputs.rows() != T)
        throw std::invalid_argument("network_backward: cache is missing or incomplete");
    if (clip.lo > clip.hi) throw std::invalid_argument("network_backward: clip range inverted");

    BackwardResult r{params.zeros_like(), initial_state(arch), Mat()};
    ParamStore &grad = r.grad;
    CharSeq chars{cache.chars, cache.alphabet_size};
    const bool window = arch.has_window;
    const std::size_t A = window ? static_cast<std::size_t>(arch.alphabet_size) : 0;
    const std::size_t K = window ? static_cast<std::size_t>(arch.window_components) : 0;
    if (window) r.dwindow = Mat(T, A);

    std::vector<Vec> dh(static_cast<std::size_t>(N));
    std::vector<Vec> dh_next(static_cast<std::size_t>(N));
    std::vector<Vec> dc_next(static_cast<std::size_t>(N));
    for (int n = 0; n < N; ++n) {
        const auto H = static_cast<std::size_t>(arch.layer_widths[n]);
        dh_next[n].assign(H, 0.0);
        dc_next[n].assign(H, 0.0);
    }
    Vec dw_from_layer0(A, 0.0); // dL/dw_t through layer 0 at t+1
    Vec dkappa_next(K, 0.0);
    Vec dw(A, 0.0);
    Vec da, dc_prev;

    std::vector<CellParams> cells;
    for (int n = 0; n < N; ++n) cells.push_back(cell_params(params, n));

    auto h_at = [&](int n, std::ptrdiff_t t) -> std::span<const double> {
        if (t < 0) return cache.initial.layers[n].h;
        return cache.steps[static_cast<std::size_t>(t)].layers[n].h;
    };
    auto c_at = [&](int n, std::ptrdiff_t t) -> std::span<const double> {
        if (t < 0) return cache.initial.layers[n].c;
        return cache.steps[static_cast<std::size_t>(t)].layers[n].c;
    };
    auto w_at = [&](std::ptrdiff_t t) -> std::span<const double> {
        if (!window) return empty_span();
        if (t < 0) return cache.initial.window;
        return cache.steps[static_cast<std::size_t>(t)].window.w;
    };

    // One layer's backward step; accumulates its parameter gradients and
    // returns da for the caller to route to the layer below / the window.
    auto layer_backward = [&](int n, std::ptrdiff_t t, std::span<const double> window_in) {
        const LayerLayout &LL = L.layers[n];
        const StepCache &sc = cache.steps[static_cast<std::size_t>(t)];
        cell_backward(cells[n], sc.layers[n], c_at(n, t - 1), dh[n], dc_next[n], clip, da,
                      dc_prev);
        const std::size_t H = sc.layers[n].h.size();
        add_outer(grad, LL.w_input, da, cache.inputs.row(static_cast<std::size_t>(t)));
        if (n > 0) add_outer(grad, LL.w_below, da, h_at(n - 1, t));
        add_outer(grad, LL.w_recurrent, da, h_at(n, t - 1));
        if (window) add_outer(grad, LL.w_window, da, window_in);
        add_to(grad.view(LL.bias).flat(), da);
        auto c_prev = c_at(n, t - 1);
        auto gpi = grad.view(LL.peep_input).flat();
        auto gpf = grad.view(LL.peep_forget).flat();
        auto gpo = grad.view(LL.peep_output).flat();
        for (std::size_t m = 0; m < H; ++m) {
            gpi[m] += da[m] * c_prev[m];
            gpf[m] += da[H + m] * c_prev[m];
            gpo[m] += da[3 * H + m] * sc.layers[n].c[m];
        }
        std::fill(dh_next[n].begin(), dh_next[n].end(), 0.0);
        kernels::gemv_t(cells[n].recurrent.data, 4 * H, H, da.data(), dh_next[n].data());
        dc_next[n] = dc_prev;
    };

    for (std::ptrdiff_t t = static_cast<std::ptrdiff_t>(T) - 1; t >= 0; --t) {
        const StepCache &sc = cache.steps[static_cast<std::size_t>(t)];
        const auto dy = dyhat.row(static_cast<std::size_t>(t));
        add_to(grad.view(L.output_bias).flat(), dy);
        for (int n = 0; n < N; ++n) {
            add_outer(grad, L.layers[n].w_output, dy, sc.layers[n].h);
            dh[n] = dh_next[n];
            const ConstMatView Wy = params.view(L.layers[n].w_output);
            kernels::gemv_t(Wy.data, Wy.rows, Wy.cols, dy.data(), dh[n].data());
        }
        if (window) dw = dw_from_layer0;

        for (int n = N - 1; n >= 1; --n) {
            const LayerLayout &LL = L.layers[n];
            layer_backward(n, t, w_at(t));
            const std::size_t H = static_cast<std::size_t>(LL.width);
            const ConstMatView Wb = params.view(LL.w_below);
            kernels::gemv_t(Wb.data, 4 * H, Wb.cols, da.data(), dh[n - 1].data());
            if (window) {
                const ConstMatView Ww = params.view(LL.w_window);
                kernels::gemv_t(Ww.data, 4 * H, A, da.data(), dw.data());
            }
        }

        if (window) {
            std::copy(dw.begin(), dw.end(), r.dwindow.row(static_cast<std::size_t>(t)).begin());
            WindowGrad wg = window_backward(sc.window, dw, dkappa_next, chars);
            add_outer(grad, L.window_weights, wg.dp_hat, sc.layers[0].h);
            add_to(grad.view(L.window_bias).flat(), wg.dp_hat);
            const ConstMatView Wp = params.view(L.window_weights);
            kernels::gemv_t(Wp.data, Wp.rows, Wp.cols, wg.dp_hat.data(), dh[0].data());
            dkappa_next = std::move(wg.dkappa);
        }

        layer_backward(0, t, w_at(t - 1));
        if (window) {
            std::fill(dw_from_layer0.begin(), dw_from_layer0.end(), 0.0);
            const ConstMatView Ww = params.view(L.layers[0].w_window);
            kernels::gemv_t(Ww.data, Ww.rows, A, da.data(), dw_from_layer0.data());
        }
    }

    for (int n = 0; n < N; ++n) {
        r.dinitial.layers[n].h = dh_next[n];
        r.dinitial.layers[n].c = dc_next[n];
    }
    if (window) {
        r.dinitial.kappa = dkappa_next;
        r.dinitial.window = dw_from_layer0;
    }
    return r;
}

} // namespace scribe

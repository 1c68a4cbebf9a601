#pragma once

// Oracles shared by the unit tests and the acceptance runner. Nothing here
// calls into the library's forward/backward code: the reference network is a
// direct element-by-element transcription of the model equations.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "scribe/data_io.hpp"
#include "scribe/mdn.hpp"
#include "scribe/numkit.hpp"
#include "scribe/params.hpp"

namespace scribe::testing {

inline double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

struct GradReport {
    double max_rel = 0.0;
    std::string worst;
    std::size_t checked = 0;
    void merge(const GradReport &o) {
        if (o.max_rel > max_rel) {
            max_rel = o.max_rel;
            worst = o.worst;
        }
        checked += o.checked;
    }
};

// Central differences of `loss` w.r.t. every entry of `x`, compared with
// `analytic`. `x` is restored exactly afterwards.
inline GradReport check_gradient(std::span<double> x, std::span<const double> analytic,
                                 const std::function<double()> &loss,
                                 const std::function<std::string(std::size_t)> &name = {},
                                 double h = 1e-5) {
    GradReport r;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + h;
        const double up = loss();
        x[i] = keep - h;
        const double down = loss();
        x[i] = keep;
        const double fd = (up - down) / (2.0 * h);
        const double e = rel_err(analytic[i], fd);
        ++r.checked;
        if (e > r.max_rel) {
            r.max_rel = e;
            char buf[96];
            std::snprintf(buf, sizeof buf, " analytic=%.9e fd=%.9e", analytic[i], fd);
            r.worst = (name ? name(i) : "[" + std::to_string(i) + "]") + buf;
        }
    }
    return r;
}

inline std::string param_name(const ParamStore &p, std::size_t i) {
    for (const ViewInfo &v : p.layout().views)
        if (i >= v.offset && i < v.offset + v.rows * v.cols) {
            const std::size_t k = i - v.offset;
            return v.name + "(" + std::to_string(k / std::max<std::size_t>(v.cols, 1)) + "," +
                   std::to_string(k % std::max<std::size_t>(v.cols, 1)) + ")";
        }
    return "?";
}

// Every entry (biases and peepholes included) uniform in (-scale, scale).
inline ParamStore random_params(const Architecture &arch, std::uint64_t seed, double scale) {
    ParamStore p(arch);
    Rng rng(seed);
    for (double &w : p.flat()) w = rng.uniform(-scale, scale);
    return p;
}

inline Mat random_mat(std::size_t rows, std::size_t cols, Rng &rng, double scale = 1.0) {
    Mat m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-scale, scale);
    return m;
}

// ─── Mixture-head gradient cases ────────────────────────────────────────────

struct MdnCase {
    Vec yhat;
    StrokePoint target;
};

// Random head outputs and a target near one of the means. Cases where some
// component has responsibility below 1e-3 are redrawn: their gradients sit
// under the resolution of central differences on an O(1) loss. rho_abs >= 0
// forces |rho| = rho_abs on every component.
inline MdnCase random_mdn_case(int M, Rng &rng, double rho_abs = -1.0) {
    const MdnSlots s{static_cast<std::size_t>(M)};
    for (;;) {
        MdnCase c;
        c.yhat.assign(s.size(), 0.0);
        c.yhat[s.eos()] = rng.uniform(-2, 2);
        for (std::size_t j = 0; j < s.M; ++j) {
            c.yhat[s.pi(j)] = rng.uniform(-1, 1);
            c.yhat[s.mu1(j)] = rng.uniform(-1, 1);
            c.yhat[s.mu2(j)] = rng.uniform(-1, 1);
            c.yhat[s.sigma1(j)] = rng.uniform(-0.5, 0.7);
            c.yhat[s.sigma2(j)] = rng.uniform(-0.5, 0.7);
            c.yhat[s.rho(j)] = rho_abs >= 0.0 ? std::atanh(rng.uniform() < 0.5 ? rho_abs : -rho_abs)
                                              : rng.uniform(-1.5, 1.5);
        }
        const std::size_t j = rng.uniform_index(s.M);
        c.target = {c.yhat[s.mu1(j)] + rng.uniform(-0.7, 0.7), c.yhat[s.mu2(j)] + rng.uniform(-0.7, 0.7),
                    static_cast<int>(rng.uniform_index(2))};
        const MdnStepResult r = mdn_step_loss(split_outputs(c.yhat, M), c.target);
        if (*std::min_element(r.cache.gamma.begin(), r.cache.gamma.end()) >= 1e-3) return c;
    }
}

// ─── Reference network ──────────────────────────────────────────────────────

inline double ref_sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct RefTrace {
    Mat yhat;
    std::vector<std::vector<double>> phi; // per step, U + 1 entries
    std::vector<std::vector<double>> kappa;
    std::vector<std::vector<double>> h_last; // final h per layer
    std::vector<std::vector<double>> c_last;
};

// Straight-line forward pass of the skip-connected stack (and window when the
// architecture has one), reading weights by view name.
inline RefTrace reference_forward(const ParamStore &p, const Mat &x,
                                  const std::vector<int> &chars = {},
                                  const std::vector<std::vector<double>> *h0 = nullptr,
                                  const std::vector<std::vector<double>> *c0 = nullptr) {
    const Architecture &a = p.arch();
    const int N = a.num_layers();
    const std::size_t T = x.rows();
    const auto I = static_cast<std::size_t>(a.input_size);
    const auto O = static_cast<std::size_t>(a.output_size);
    const auto A = static_cast<std::size_t>(a.alphabet_size);
    const auto K = static_cast<std::size_t>(a.window_components);
    const std::size_t U = chars.size();
    RefTrace tr;
    tr.yhat = Mat(T, O);
    std::vector<std::vector<double>> h(N), c(N);
    for (int n = 0; n < N; ++n) {
        h[n] = h0 ? (*h0)[n] : std::vector<double>(a.layer_widths[n], 0.0);
        c[n] = c0 ? (*c0)[n] : std::vector<double>(a.layer_widths[n], 0.0);
    }
    std::vector<double> kappa(K, 0.0), w(A, 0.0);

    for (std::size_t t = 0; t < T; ++t) {
        for (int n = 0; n < N; ++n) {
            const std::string L = "layer" + std::to_string(n) + ".";
            const auto H = static_cast<std::size_t>(a.layer_widths[n]);
            ConstMatView Wx = p.view(L + "W_x"), Wh = p.view(L + "W_h"), b = p.view(L + "b");
            ConstMatView pi = p.view(L + "peep_i"), pf = p.view(L + "peep_f"),
                         po = p.view(L + "peep_o");
            std::vector<double> hn(H), cn(H);
            for (std::size_t j = 0; j < H; ++j) {
                double s[4];
                for (int g = 0; g < 4; ++g) {
                    const std::size_t row = static_cast<std::size_t>(g) * H + j;
                    double acc = b(row, 0);
                    for (std::size_t k = 0; k < I; ++k) acc += Wx(row, k) * x(t, k);
                    for (std::size_t k = 0; k < H; ++k) acc += Wh(row, k) * h[n][k];
                    if (n > 0) {
                        ConstMatView Wb = p.view(L + "W_below");
                        for (std::size_t k = 0; k < h[n - 1].size(); ++k)
                            acc += Wb(row, k) * h[n - 1][k];
                    }
                    if (a.has_window) {
                        ConstMatView Ww = p.view(L + "W_w");
                        for (std::size_t k = 0; k < A; ++k) acc += Ww(row, k) * w[k];
                    }
                    s[g] = acc;
                }
                const double ig = ref_sigmoid(s[0] + pi(j, 0) * c[n][j]);
                const double fg = ref_sigmoid(s[1] + pf(j, 0) * c[n][j]);
                cn[j] = fg * c[n][j] + ig * std::tanh(s[2]);
                const double og = ref_sigmoid(s[3] + po(j, 0) * cn[j]);
                hn[j] = og * std::tanh(cn[j]);
            }
            h[n] = hn;
            c[n] = cn;

            if (n == 0 && a.has_window) {
                ConstMatView Wp = p.view("window.W"), bp = p.view("window.b");
                std::vector<double> ph(3 * K);
                for (std::size_t r = 0; r < 3 * K; ++r) {
                    double acc = bp(r, 0);
                    for (std::size_t k = 0; k < H; ++k) acc += Wp(r, k) * h[0][k];
                    ph[r] = acc;
                }
                std::vector<double> phi(U + 1, 0.0);
                for (std::size_t k = 0; k < K; ++k) {
                    kappa[k] += std::exp(ph[2 * K + k]);
                    const double al = std::exp(ph[k]), be = std::exp(ph[K + k]);
                    for (std::size_t u = 1; u <= U + 1; ++u) {
                        const double d = kappa[k] - static_cast<double>(u);
                        phi[u - 1] += al * std::exp(-be * d * d);
                    }
                }
                std::fill(w.begin(), w.end(), 0.0);
                for (std::size_t u = 0; u < U; ++u) w[static_cast<std::size_t>(chars[u])] += phi[u];
                tr.phi.push_back(phi);
                tr.kappa.push_back(kappa);
            }
        }
        ConstMatView by = p.view("out.b");
        for (std::size_t o = 0; o < O; ++o) {
            double acc = by(o, 0);
            for (int n = 0; n < N; ++n) {
                ConstMatView Wy = p.view("out.W" + std::to_string(n));
                for (std::size_t k = 0; k < h[n].size(); ++k) acc += Wy(o, k) * h[n][k];
            }
            tr.yhat(t, o) = acc;
        }
    }
    tr.h_last = h;
    tr.c_last = c;
    return tr;
}

// ─── Toy glyph decoding ─────────────────────────────────────────────────────

inline std::size_t edit_distance(const std::string &a, const std::string &b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1,
                               prev[j - 1] + (a[i - 1] == b[j - 1] ? 0u : 1u)});
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

// Splits at pen lifts and labels each piece with the motif nearest in L2
// (offset by offset, missing points counted as zero offsets). A trailing
// piece without a pen lift counts when it has at least half a motif.
inline std::string decode_glyphs(const std::vector<StrokePoint> &pts, const ToyGlyphCorpus &toy) {
    std::string out;
    const std::size_t L = toy.motifs.at(0).size();
    std::vector<StrokePoint> seg;
    auto classify = [&] {
        double best = INFINITY;
        std::size_t arg = 0;
        for (std::size_t s = 0; s < toy.motifs.size(); ++s) {
            const auto &m = toy.motifs[s];
            double d = 0.0;
            for (std::size_t i = 0; i < std::max(seg.size(), m.size()); ++i) {
                const double ax = i < seg.size() ? seg[i].dx : 0.0;
                const double ay = i < seg.size() ? seg[i].dy : 0.0;
                const double bx = i < m.size() ? m[i].dx : 0.0;
                const double by = i < m.size() ? m[i].dy : 0.0;
                d += (ax - bx) * (ax - bx) + (ay - by) * (ay - by);
            }
            if (d < best) {
                best = d;
                arg = s;
            }
        }
        out += toy.alphabet.symbols[arg];
        seg.clear();
    };
    for (std::size_t t = toy.lead_in; t < pts.size(); ++t) {
        const StrokePoint &p = pts[t];
        seg.push_back(p);
        if (p.eos == 1) classify();
    }
    if (seg.size() * 2 >= L) classify();
    return out;
}

inline double symbol_accuracy(const std::string &decoded, const std::string &target) {
    if (target.empty()) return decoded.empty() ? 1.0 : 0.0;
    const double e = static_cast<double>(edit_distance(decoded, target));
    return std::max(0.0, 1.0 - e / static_cast<double>(target.size()));
}

} // namespace scribe::testing

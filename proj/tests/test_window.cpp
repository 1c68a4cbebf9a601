#include <doctest.h>

#include <cmath>

#include "scribe/network.hpp"
#include "scribe/window.hpp"
#include "support.hpp"

using namespace scribe;
using testing::random_mat;

namespace {

Architecture synth_arch(int in, std::vector<int> widths, int out, int K, int A) {
    Architecture a;
    a.input_size = in;
    a.layer_widths = std::move(widths);
    a.output_size = out;
    a.has_window = true;
    a.window_components = K;
    a.alphabet_size = A;
    return a;
}

double projected(const Mat &y, const Mat &R) {
    double l = 0;
    for (std::size_t i = 0; i < R.size(); ++i) l += R.data()[i] * y.data()[i];
    return l;
}

} // namespace

TEST_CASE("window_step") {
    SUBCASE("single component at an integer location") {
        const CharSeq chars{{0, 1, 2}, 3};
        const WindowCache w = window_step(Vec{0, 0, 0}, Vec{1.0}, chars);
        CHECK(w.kappa[0] == 2.0);
        CHECK(w.phi.size() == 4);
        CHECK(w.phi[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
        CHECK(w.phi[1] == 1.0);
        CHECK(w.phi[2] == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
        CHECK(w.phi[3] == doctest::Approx(std::exp(-4.0)).epsilon(1e-15));
        for (std::size_t u = 0; u < 3; ++u) CHECK(w.w[u] == w.phi[u]);
    }
    SUBCASE("sharp window picks one character") {
        const CharSeq chars{{2, 0, 1}, 3};
        const WindowCache w = window_step(Vec{0, std::log(1e6), std::log(2.0)}, Vec{1.0}, chars);
        CHECK(w.kappa[0] == 3.0);
        CHECK(w.w[1] == doctest::Approx(1.0));
        CHECK(w.w[0] < 1e-300);
        CHECK(w.w[2] < 1e-300);
    }
    SUBCASE("double-loop oracle") {
        Rng rng(4);
        const std::size_t K = 2, U = 5, A = 4;
        const CharSeq chars{{3, 1, 1, 0, 2}, static_cast<int>(A)};
        for (int trial = 0; trial < 10; ++trial) {
            Vec p(3 * K), kp(K);
            for (double &v : p) v = rng.uniform(-1.5, 1.5);
            for (double &v : kp) v = rng.uniform(0, 5);
            const WindowCache w = window_step(p, kp, chars);
            Vec w_ref(A, 0.0);
            for (std::size_t u = 1; u <= U + 1; ++u) {
                double phi = 0;
                for (std::size_t k = 0; k < K; ++k) {
                    const double kap = kp[k] + std::exp(p[2 * K + k]);
                    phi += std::exp(p[k]) * std::exp(-std::exp(p[K + k]) * (kap - u) * (kap - u));
                }
                CHECK(std::abs(w.phi[u - 1] - phi) < 1e-12);
                if (u <= U) w_ref[static_cast<std::size_t>(chars.indices[u - 1])] += phi;
            }
            for (std::size_t a = 0; a < A; ++a) CHECK(std::abs(w.w[a] - w_ref[a]) < 1e-12);
        }
    }
    SUBCASE("overflow names the parameter") {
        const CharSeq chars{{0}, 1};
        try {
            window_step(Vec{800, 0, 0}, Vec{0.0}, chars);
            FAIL("expected NumericError");
        } catch (const NumericError &e) {
            CHECK(std::string(e.what()).find("alpha") != std::string::npos);
        }
        // kappa_hat is clamped instead
        const WindowCache w = window_step(Vec{0, 0, 1e4}, Vec{0.0}, chars);
        CHECK(w.kappa[0] == std::exp(kKappaHatLimit));
        CHECK(w.kappa_clamped[0]);
    }
    CHECK_THROWS((CharSeq{{0, 3}, 3}.validate()));
}

TEST_CASE("window_backward") {
    SUBCASE("zero upstream gives zero") {
        const CharSeq chars{{0, 1}, 2};
        const WindowCache c = window_step(Vec{0.1, 0.2, 0.3}, Vec{0.5}, chars);
        const WindowGrad g = window_backward(c, Vec{0, 0}, Vec{0}, chars);
        for (double v : g.dp_hat) CHECK(v == 0.0);
        CHECK(g.dkappa[0] == 0.0);
    }
    SUBCASE("K = 1, U = 1 by hand") {
        const CharSeq chars{{0}, 1};
        const double a = 0.3, b = -0.4, k = 0.2, k0 = 0.1;
        const WindowCache c = window_step(Vec{a, b, k}, Vec{k0}, chars);
        const WindowGrad g = window_backward(c, Vec{1.0}, Vec{0.0}, chars);
        const double kap = k0 + std::exp(k);
        const double phi = std::exp(a) * std::exp(-std::exp(b) * (kap - 1) * (kap - 1));
        const double dkap = phi * -2 * std::exp(b) * (kap - 1);
        CHECK(g.dp_hat[0] == doctest::Approx(phi).epsilon(1e-14));
        CHECK(g.dp_hat[1] == doctest::Approx(-std::exp(b) * (kap - 1) * (kap - 1) * phi).epsilon(1e-14));
        CHECK(g.dp_hat[2] == doctest::Approx(std::exp(k) * dkap).epsilon(1e-14));
        CHECK(g.dkappa[0] == doctest::Approx(dkap).epsilon(1e-14));
    }
    SUBCASE("finite differences") {
        Rng rng(9);
        const std::size_t K = 2, A = 3;
        const CharSeq chars{{0, 2, 1, 1, 0, 2}, static_cast<int>(A)};
        for (int trial = 0; trial < 10; ++trial) {
            Vec p(3 * K), kp(K), R(A), S(K);
            for (double &v : p) v = rng.uniform(-1, 1);
            for (double &v : kp) v = rng.uniform(0, 6);
            for (double &v : R) v = rng.uniform(-1, 1);
            for (double &v : S) v = rng.uniform(-1, 1);
            // L = R . w_t + S . kappa_t
            auto loss = [&] {
                const WindowCache c = window_step(p, kp, chars);
                double l = 0;
                for (std::size_t i = 0; i < A; ++i) l += R[i] * c.w[i];
                for (std::size_t i = 0; i < K; ++i) l += S[i] * c.kappa[i];
                return l;
            };
            const WindowGrad g = window_backward(window_step(p, kp, chars), R, S, chars);
            auto rep = testing::check_gradient(p, g.dp_hat, loss);
            rep.merge(testing::check_gradient(kp, g.dkappa, loss));
            CAPTURE(rep.worst);
            CHECK(rep.max_rel < 1e-6);
        }
    }
}

TEST_CASE("stop_check") {
    CHECK(stop_check(Vec{0.2, 0.3, 0.5}));
    CHECK_FALSE(stop_check(Vec{0.5, 0.3, 0.5}));
    CHECK(stop_check(Vec{0, 0, 1e-300}));
    CHECK_FALSE(stop_check(Vec{0, 0, 0}));
    CHECK_FALSE(stop_check(Vec{0.1, 0.7, 0.4}));
}

TEST_CASE("synthesis network forward") {
    SUBCASE("matches the straight-line reference") {
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            const Architecture a = synth_arch(3, {6, 5}, 7, 2, 4);
            const ParamStore p = testing::random_params(a, seed, 0.5);
            Rng rng(seed);
            const Mat x = random_mat(9, 3, rng);
            const std::vector<int> ch{1, 3, 0, 2, 2};
            const ForwardResult f = synth_forward(p, x, CharSeq{ch, 4}, initial_state(a));
            const testing::RefTrace r = testing::reference_forward(p, x, ch);
            for (std::size_t i = 0; i < f.yhat.size(); ++i)
                CHECK(std::abs(f.yhat.data()[i] - r.yhat.data()[i]) < 1e-12);
            for (std::size_t t = 0; t < 9; ++t)
                for (std::size_t u = 0; u <= ch.size(); ++u)
                    CHECK(std::abs(f.cache.steps[t].window.phi[u] - r.phi[t][u]) < 1e-12);
        }
    }
    SUBCASE("zero weights give the output bias; locations increase") {
        const Architecture a = synth_arch(3, {4}, 5, 2, 3);
        ParamStore p(a);
        for (std::size_t o = 0; o < 5; ++o) p.view("out.b")(o, 0) = 0.1 * static_cast<double>(o);
        Rng rng(2);
        const ForwardResult f = synth_forward(p, random_mat(6, 3, rng), CharSeq{{2}, 3}, initial_state(a));
        for (std::size_t t = 0; t < 6; ++t) {
            for (std::size_t o = 0; o < 5; ++o) CHECK(f.yhat(t, o) == 0.1 * static_cast<double>(o));
            const Vec &kap = f.cache.steps[t].window.kappa;
            const Vec prev = t ? f.cache.steps[t - 1].window.kappa : Vec(2, 0.0);
            for (std::size_t k = 0; k < 2; ++k) CHECK(kap[k] > prev[k]);
        }
    }
    SUBCASE("empty transcript is rejected") {
        const Architecture a = synth_arch(3, {4}, 5, 2, 3);
        const ParamStore p(a);
        CHECK_THROWS(synth_forward(p, Mat(2, 3), CharSeq{{}, 3}, initial_state(a)));
    }
}

TEST_CASE("synthesis network backward") {
    SUBCASE("finite differences over every view") {
        testing::GradReport rep;
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            const Architecture a = synth_arch(3, {5, 4}, 7, 2, 3);
            ParamStore p = testing::random_params(a, seed * 7, 0.5);
            Rng rng(seed);
            const Mat x = random_mat(7, 3, rng);
            const Mat R = random_mat(7, 7, rng);
            const CharSeq ch{{0, 2, 1, 2}, 3};
            const ForwardResult f = synth_forward(p, x, ch, initial_state(a));
            const BackwardResult b = synth_backward(p, f.cache, R);
            rep.merge(testing::check_gradient(
                p.flat(), b.grad.flat(),
                [&] { return projected(synth_forward(p, x, ch, initial_state(a)).yhat, R); },
                [&](std::size_t i) { return testing::param_name(p, i); }));
            for (const char *name : {"window.W", "window.b", "layer0.W_w", "layer1.W_w"}) {
                double mag = 0;
                for (double g : b.grad.view(name).flat()) mag += std::abs(g);
                CHECK(mag > 0.0);
            }
        }
        CAPTURE(rep.worst);
        CHECK(rep.max_rel < 1e-4);
    }
    SUBCASE("zero output derivatives") {
        const Architecture a = synth_arch(3, {4}, 5, 1, 2);
        const ParamStore p = testing::random_params(a, 3, 0.5);
        Rng rng(1);
        const CharSeq ch{{0, 1}, 2};
        const ForwardResult f = synth_forward(p, random_mat(4, 3, rng), ch, initial_state(a));
        const BackwardResult b = synth_backward(p, f.cache, Mat(4, 5));
        for (double g : b.grad.flat()) CHECK(g == 0.0);
    }
    SUBCASE("disconnecting the window reproduces the prediction network") {
        const Architecture a = synth_arch(3, {5, 4}, 7, 2, 3);
        ParamStore p = testing::random_params(a, 5, 0.5);
        for (const char *name : {"layer0.W_w", "layer1.W_w", "window.W"})
            for (double &v : p.view(name).flat()) v = 0.0;
        Architecture plain_arch = a;
        plain_arch.has_window = false;
        plain_arch.window_components = 0;
        plain_arch.alphabet_size = 0;
        ParamStore q(plain_arch);
        for (const ViewInfo &v : q.layout().views) {
            ConstMatView src = p.view(v.name);
            std::copy(src.flat().begin(), src.flat().end(), q.view(v).flat().begin());
        }
        Rng rng(6);
        const Mat x = random_mat(8, 3, rng);
        const Mat R = random_mat(8, 7, rng);
        const CharSeq ch{{0, 1, 2}, 3};
        const ForwardResult fs = synth_forward(p, x, ch, initial_state(a));
        const ForwardResult fp = stack_forward(q, x, initial_state(plain_arch));
        CHECK(fs.yhat == fp.yhat);
        const BackwardResult bs = synth_backward(p, fs.cache, R);
        const BackwardResult bp = stack_backward(q, fp.cache, R);
        for (const ViewInfo &v : q.layout().views) {
            ConstMatView gs = bs.grad.view(v.name), gp = bp.grad.view(v);
            for (std::size_t i = 0; i < gp.size(); ++i) CHECK(gs.flat()[i] == gp.flat()[i]);
        }
        for (double g : bs.grad.view("window.b").flat()) CHECK(g == 0.0);
    }
}

#include "scribe/sampler.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "scribe/mdn.hpp"
#include "scribe/network.hpp"

namespace scribe {

namespace {

void require_head(const Model &m, HeadKind h, bool window, const char *what) {
    if (m.head != h || m.is_synthesis() != window)
        throw std::invalid_argument(std::string(what) + ": checkpoint has the wrong model type");
}

} // namespace

std::vector<int> sample_text_indices(const Model &model, const TextSampleConfig &cfg) {
    require_head(model, HeadKind::Softmax, false, "sample_text");
    const Vocab &vocab = *model.vocab;
    const auto K = static_cast<std::size_t>(vocab.size());
    Rng rng(cfg.seed);
    NetworkState state = initial_state(model.arch());
    StepCache cache;
    Vec x(K, 0.0), yhat(K);
    auto feed = [&](int sym) {
        std::fill(x.begin(), x.end(), 0.0);
        if (sym >= 0) x[static_cast<std::size_t>(sym)] = 1.0;
        network_step(model.params, x, nullptr, state, cache, yhat);
    };

    std::vector<int> out;
    if (cfg.length == 0) return out;
    feed(-1);
    if (!cfg.prime.empty()) {
        for (int sym : encode_text(cfg.prime, vocab)) feed(sym);
    }
    while (true) {
        int sym;
        if (cfg.greedy) {
            sym = static_cast<int>(std::max_element(yhat.begin(), yhat.end()) - yhat.begin());
        } else {
            sym = static_cast<int>(sample_categorical(softmax_stable(yhat), rng));
        }
        out.push_back(sym);
        if (out.size() == cfg.length) break;
        feed(sym);
    }
    return out;
}

std::string sample_text(const Model &model, const TextSampleConfig &cfg) {
    return model.vocab->decode(sample_text_indices(model, cfg));
}

StrokeSeq sample_handwriting(const Model &model, std::size_t steps, std::uint64_t seed,
                             double bias) {
    require_head(model, HeadKind::Mixture, false, "sample_handwriting");
    const NormStats norm = model.norm.value_or(NormStats{});
    Rng rng(seed);
    NetworkState state = initial_state(model.arch());
    StepCache cache;
    Vec x(3, 0.0), yhat(static_cast<std::size_t>(model.arch().output_size));
    StrokeSeq out;
    for (std::size_t t = 0; t < steps; ++t) {
        network_step(model.params, x, nullptr, state, cache, yhat, t);
        const StrokePoint p = mdn_sample(apply_bias(yhat, model.mixture_components, bias), rng);
        write_stroke_input(p, x);
        out.points.push_back(norm.denormalize(p));
    }
    return out;
}

std::size_t default_max_steps(std::size_t text_len) { return 60 * text_len + 300; }

SynthResult primed_sample(const Model &model, const StrokeSeq &prime_strokes,
                          std::string_view prime_text, std::string_view synth_text,
                          const SampleConfig &cfg) {
    require_head(model, HeadKind::Mixture, true, "synth_sample");
    if (!(cfg.bias >= 0.0)) throw std::invalid_argument("bias must be >= 0");
    const std::string text = std::string(prime_text) + std::string(synth_text);
    const CharSeq chars = encode_transcript(text, *model.alphabet);
    if (chars.size() == 0) throw std::invalid_argument("synthesis text must not be empty");
    const std::size_t U = chars.size();
    const std::size_t max_steps = cfg.max_steps ? cfg.max_steps : default_max_steps(U);
    const NormStats norm = model.norm.value_or(NormStats{});

    Rng rng(cfg.seed);
    NetworkState state = initial_state(model.arch());
    StepCache cache;
    Vec x(3, 0.0), yhat(static_cast<std::size_t>(model.arch().output_size));
    std::vector<Vec> phi_rows;
    SynthResult r;
    r.strokes.text = std::string(synth_text);

    // Priming: clamp the inputs to the prime, discard the predictions.
    const std::size_t P = prime_strokes.points.size();
    for (std::size_t t = 0; t < P; ++t) {
        network_step(model.params, x, &chars, state, cache, yhat, t);
        phi_rows.push_back(cache.window.phi);
        write_stroke_input(norm.normalize(prime_strokes.points[t]), x);
    }
    r.prime_steps = P;

    for (std::size_t t = 0; t < max_steps; ++t) {
        network_step(model.params, x, &chars, state, cache, yhat, P + t);
        phi_rows.push_back(cache.window.phi);
        if (cfg.stop == StopMode::Heuristic && stop_check(cache.window.phi)) {
            r.stopped = true;
            break;
        }
        const StrokePoint p = mdn_sample(apply_bias(yhat, model.mixture_components, cfg.bias), rng);
        write_stroke_input(p, x);
        r.strokes.points.push_back(norm.denormalize(p));
    }
    r.truncated = !r.stopped;

    r.phi = Mat(phi_rows.size(), U + 1);
    for (std::size_t t = 0; t < phi_rows.size(); ++t)
        std::copy(phi_rows[t].begin(), phi_rows[t].end(), r.phi.row(t).begin());
    return r;
}

SynthResult synth_sample(const Model &model, std::string_view text, const SampleConfig &cfg) {
    return primed_sample(model, StrokeSeq{}, "", text, cfg);
}

void save_matrix(const std::filesystem::path &path, const Mat &m) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << m.rows() << ' ' << m.cols() << '\n';
    out << std::setprecision(17);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) out << (c ? " " : "") << m(r, c);
        out << '\n';
    }
}

Mat load_matrix(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::size_t rows = 0, cols = 0;
    if (!(in >> rows >> cols)) throw std::runtime_error(path.string() + ": bad matrix header");
    Mat m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i)
        if (!(in >> m.data()[i]))
            throw std::runtime_error(path.string() + ": matrix has fewer than " +
                                     std::to_string(rows * cols) + " values");
    return m;
}

} // namespace scribe

#include "scribe/model.hpp"

#include <stdexcept>
#include <string>

#include "scribe/mdn.hpp"

namespace scribe {

std::string_view head_name(HeadKind h) {
    return h == HeadKind::Softmax ? "softmax" : "mixture";
}

HeadKind parse_head(std::string_view name) {
    if (name == "softmax") return HeadKind::Softmax;
    if (name == "mixture") return HeadKind::Mixture;
    throw std::invalid_argument("unknown head '" + std::string(name) + "'");
}

void Model::validate() const {
    const Architecture &a = arch();
    a.validate();
    if (head == HeadKind::Softmax) {
        if (!vocab) throw std::invalid_argument("text model has no vocabulary");
        if (vocab->size() != a.output_size || vocab->size() != a.input_size)
            throw std::invalid_argument("vocabulary size does not match the network");
        if (a.has_window) throw std::invalid_argument("text models cannot have a window");
    } else {
        if (mixture_components < 1) throw std::invalid_argument("mixture needs components");
        if (a.output_size != mdn_output_size(mixture_components))
            throw std::invalid_argument("mixture output size does not match the network");
        if (a.input_size != 3) throw std::invalid_argument("stroke models take 3 inputs");
        if (a.has_window && (!alphabet || alphabet->size() != a.alphabet_size))
            throw std::invalid_argument("synthesis alphabet does not match the network");
    }
}

Model make_text_model(const Vocab &vocab, std::vector<int> layer_widths, std::uint64_t seed,
                      double init_scale) {
    Architecture a;
    a.input_size = vocab.size();
    a.output_size = vocab.size();
    a.layer_widths = std::move(layer_widths);
    Model m;
    m.head = HeadKind::Softmax;
    m.params = init_params(a, seed, init_scale);
    m.vocab = vocab;
    m.validate();
    return m;
}

Model make_handwriting_model(std::vector<int> layer_widths, int components, const NormStats &norm,
                             std::uint64_t seed, double init_scale) {
    Architecture a;
    a.input_size = 3;
    a.output_size = mdn_output_size(components);
    a.layer_widths = std::move(layer_widths);
    Model m;
    m.head = HeadKind::Mixture;
    m.mixture_components = components;
    m.params = init_params(a, seed, init_scale);
    m.norm = norm;
    m.validate();
    return m;
}

Model make_synthesis_model(std::vector<int> layer_widths, int components, int window_components,
                           const Alphabet &alphabet, const NormStats &norm, std::uint64_t seed,
                           double init_scale) {
    Architecture a;
    a.input_size = 3;
    a.output_size = mdn_output_size(components);
    a.layer_widths = std::move(layer_widths);
    a.has_window = true;
    a.window_components = window_components;
    a.alphabet_size = alphabet.size();
    Model m;
    m.head = HeadKind::Mixture;
    m.mixture_components = components;
    m.params = init_params(a, seed, init_scale);
    m.norm = norm;
    m.alphabet = alphabet;
    m.validate();
    return m;
}

Mat text_inputs(std::span<const int> targets, int vocab_size, std::optional<int> previous) {
    const auto K = static_cast<std::size_t>(vocab_size);
    Mat x(targets.size(), K);
    for (std::size_t t = 0; t < targets.size(); ++t) {
        const int sym = t == 0 ? previous.value_or(-1) : targets[t - 1];
        if (sym < 0) continue;
        if (sym >= vocab_size)
            throw std::out_of_range("symbol " + std::to_string(sym) + " outside vocabulary");
        x(t, static_cast<std::size_t>(sym)) = 1.0;
    }
    return x;
}

Mat stroke_inputs(std::span<const StrokePoint> points) {
    Mat x(points.size(), 3);
    for (std::size_t t = 1; t < points.size(); ++t) write_stroke_input(points[t - 1], x.row(t));
    return x;
}

} // namespace scribe

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "scribe/data_io.hpp"
#include "scribe/lstm.hpp"
#include "scribe/params.hpp"
#include "scribe/softmax_head.hpp"

namespace scribe {

enum class HeadKind { Softmax, Mixture };

std::string_view head_name(HeadKind h);
HeadKind parse_head(std::string_view name);

// A network plus everything needed to interpret its inputs and outputs.
struct Model {
    HeadKind head = HeadKind::Softmax;
    int mixture_components = 0; // M, mixture head only
    ParamStore params;
    std::optional<Vocab> vocab;     // text models
    std::optional<NormStats> norm;  // stroke models
    std::optional<Alphabet> alphabet; // synthesis models

    const Architecture &arch() const { return params.arch(); }
    bool is_synthesis() const { return arch().has_window; }
    // Throws std::invalid_argument when the pieces disagree with each other.
    void validate() const;
};

// Text: one-hot inputs and a softmax over the vocabulary.
Model make_text_model(const Vocab &vocab, std::vector<int> layer_widths, std::uint64_t seed,
                      double init_scale = 0.1);

// Handwriting prediction: (dx, dy, eos) inputs, M-component mixture outputs.
Model make_handwriting_model(std::vector<int> layer_widths, int components, const NormStats &norm,
                             std::uint64_t seed, double init_scale = 0.1);

// Synthesis: the handwriting model plus a K-component window over `alphabet`.
Model make_synthesis_model(std::vector<int> layer_widths, int components, int window_components,
                           const Alphabet &alphabet, const NormStats &norm, std::uint64_t seed,
                           double init_scale = 0.1);

// Input rows for a text sequence: row t is onehot(targets[t-1]); row 0 is
// onehot(*previous) when given, otherwise the null vector.
Mat text_inputs(std::span<const int> targets, int vocab_size, std::optional<int> previous = {});

// Input rows for a stroke sequence: row 0 is the null vector, row t is
// point t-1 as (dx, dy, eos).
Mat stroke_inputs(std::span<const StrokePoint> points);

inline void write_stroke_input(const StrokePoint &p, std::span<double> row) {
    row[0] = p.dx;
    row[1] = p.dy;
    row[2] = static_cast<double>(p.eos);
}

} // namespace scribe

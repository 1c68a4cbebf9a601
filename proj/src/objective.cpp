#include "scribe/objective.hpp"

#include <algorithm>
#include <stdexcept>

#include "scribe/mdn.hpp"
#include "scribe/network.hpp"
#include "scribe/softmax_head.hpp"

namespace scribe {

namespace {

void clip_rows(Mat &m, ClipRange r) {
    if (!r.active()) return;
    double *d = m.data();
    for (std::size_t i = 0; i < m.size(); ++i) d[i] = std::min(std::max(d[i], r.lo), r.hi);
}

} // namespace

std::size_t Objective::total_steps() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < size(); ++i) n += steps(i);
    return n;
}

TextObjective::TextObjective(std::vector<std::vector<int>> chunks, int vocab_size)
    : chunks_(std::move(chunks)), vocab_size_(vocab_size) {
    for (const auto &c : chunks_)
        for (int s : c)
            if (s < 0 || s >= vocab_size_)
                throw std::out_of_range("text symbol " + std::to_string(s) +
                                        " outside the vocabulary");
}

double TextObjective::evaluate(const ParamStore &params, std::size_t idx, NetworkState &state,
                               bool continued, ParamStore *grad, const GradientConfig &cfg) const {
    const std::vector<int> &targets = chunks_.at(idx);
    std::optional<int> previous;
    if (continued && idx > 0 && !chunks_[idx - 1].empty()) previous = chunks_[idx - 1].back();
    const Mat x = text_inputs(targets, vocab_size_, previous);
    ForwardResult fwd = network_forward(params, x, nullptr, state);
    Mat dyhat;
    const double loss = text_sequence_loss(fwd.yhat, targets, grad ? &dyhat : nullptr);
    if (grad) {
        clip_rows(dyhat, cfg.output_clip);
        *grad = network_backward(params, fwd.cache, dyhat, cfg.lstm_clip).grad;
    }
    state = std::move(fwd.final_state);
    return loss;
}

StrokeObjective::StrokeObjective(std::vector<StrokeSeq> normalized, int components,
                                 std::optional<Alphabet> alphabet)
    : seqs_(std::move(normalized)), components_(components) {
    if (components_ < 1) throw std::invalid_argument("StrokeObjective: components must be >= 1");
    for (const StrokeSeq &s : seqs_) {
        inputs_.push_back(stroke_inputs(s.points));
        if (alphabet) {
            CharSeq c = encode_transcript(s.text, *alphabet);
            if (c.size() == 0)
                throw std::invalid_argument("synthesis sequence has an empty transcript");
            chars_.push_back(std::move(c));
        }
    }
}

const CharSeq *StrokeObjective::chars(std::size_t idx) const {
    return chars_.empty() ? nullptr : &chars_.at(idx);
}

double StrokeObjective::evaluate(const ParamStore &params, std::size_t idx, NetworkState &state,
                                 bool /*continued*/, ParamStore *grad,
                                 const GradientConfig &cfg) const {
    const CharSeq *c = chars(idx);
    if (params.arch().has_window != (c != nullptr))
        throw std::invalid_argument("StrokeObjective: window / transcript mismatch");
    if (c) {
        std::fill(state.kappa.begin(), state.kappa.end(), 0.0);
        std::fill(state.window.begin(), state.window.end(), 0.0);
    }
    ForwardResult fwd = network_forward(params, inputs_.at(idx), c, state);
    Mat dyhat;
    const double loss =
        mdn_sequence_loss(fwd.yhat, seqs_[idx].points, components_, grad ? &dyhat : nullptr);
    if (grad) {
        clip_rows(dyhat, cfg.output_clip);
        *grad = network_backward(params, fwd.cache, dyhat, cfg.lstm_clip).grad;
    }
    state = std::move(fwd.final_state);
    return loss;
}

} // namespace scribe

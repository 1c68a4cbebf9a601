#pragma once

#include <optional>
#include <vector>

#include "scribe/data_io.hpp"
#include "scribe/lstm.hpp"
#include "scribe/model.hpp"

namespace scribe {

struct GradientConfig {
    ClipRange output_clip; // applied to dL/dyhat at the head
    ClipRange lstm_clip;   // applied to LSTM pre-activation derivatives
};

// A dataset of sequences together with the loss the network is trained on.
class Objective {
  public:
    virtual ~Objective() = default;

    virtual std::size_t size() const = 0;
    // Number of scored predictions in sequence `idx`.
    virtual std::size_t steps(std::size_t idx) const = 0;

    // Loss (nats) of sequence `idx` starting from `state`, which is replaced
    // by the final state. `continued` says the state was carried over from
    // sequence idx - 1 rather than reset. When `grad` is non-null it receives
    // the full gradient (overwritten, not accumulated).
    virtual double evaluate(const ParamStore &params, std::size_t idx, NetworkState &state,
                            bool continued, ParamStore *grad,
                            const GradientConfig &cfg) const = 0;

    // Nats per scored step reported as bits (text) or left in nats.
    virtual bool reports_bits() const { return false; }

    std::size_t total_steps() const;
};

// Consecutive text chunks. A chunk continuing its predecessor sees the
// predecessor's last symbol as its first input; otherwise the null vector.
class TextObjective : public Objective {
  public:
    TextObjective(std::vector<std::vector<int>> chunks, int vocab_size);

    std::size_t size() const override { return chunks_.size(); }
    std::size_t steps(std::size_t idx) const override { return chunks_.at(idx).size(); }
    double evaluate(const ParamStore &params, std::size_t idx, NetworkState &state,
                    bool continued, ParamStore *grad, const GradientConfig &cfg) const override;
    bool reports_bits() const override { return true; }

    const std::vector<std::vector<int>> &chunks() const { return chunks_; }

  private:
    std::vector<std::vector<int>> chunks_;
    int vocab_size_;
};

// Normalised stroke sequences under the mixture head. With an alphabet the
// loss is conditioned on each sequence's transcript through the window,
// whose location and output are reset at every sequence start.
class StrokeObjective : public Objective {
  public:
    StrokeObjective(std::vector<StrokeSeq> normalized, int components,
                    std::optional<Alphabet> alphabet = {});

    std::size_t size() const override { return seqs_.size(); }
    std::size_t steps(std::size_t idx) const override { return seqs_.at(idx).points.size(); }
    double evaluate(const ParamStore &params, std::size_t idx, NetworkState &state,
                    bool continued, ParamStore *grad, const GradientConfig &cfg) const override;

    const std::vector<StrokeSeq> &sequences() const { return seqs_; }
    const CharSeq *chars(std::size_t idx) const;

  private:
    std::vector<StrokeSeq> seqs_;
    std::vector<Mat> inputs_;
    std::vector<CharSeq> chars_;
    int components_;
};

} // namespace scribe

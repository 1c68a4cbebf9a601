#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "scribe/model.hpp"
#include "scribe/objective.hpp"
#include "scribe/optim.hpp"

namespace scribe {

// Adds N(0, std^2) noise to every parameter for the lifetime of the object
// and puts back the exact clean values on restore() or destruction.
class PerturbedWeights {
  public:
    PerturbedWeights(ParamStore &params, double std, Rng &rng);
    ~PerturbedWeights();
    PerturbedWeights(const PerturbedWeights &) = delete;
    PerturbedWeights &operator=(const PerturbedWeights &) = delete;

    void restore();
    const Vec &clean() const { return clean_; }

  private:
    ParamStore &params_;
    Vec clean_;
    bool active_ = false;
};

inline constexpr std::size_t kNeverReset = std::numeric_limits<std::size_t>::max();

struct TrainConfig {
    OptimizerConfig optimizer;
    GradientConfig clip;
    double weight_noise_std = 0.0;
    std::size_t reset_period = kNeverReset; // sequences between state resets
    bool shuffle = false;
    int epochs = 1;
    int patience = 3;           // epochs without validation improvement
    std::uint64_t seed = 1;
    std::size_t max_updates = 0; // 0 = unlimited
    double max_seconds = 0.0;    // wall-clock budget, 0 = unlimited
    std::filesystem::path checkpoint; // written on improvement (empty = off)

    void validate() const;
};

struct EpochMetrics {
    int epoch = 0;
    std::size_t updates = 0;
    double train_loss = 0.0;   // nats per sequence
    double train_per_step = 0.0; // nats per step
    double valid_loss = std::numeric_limits<double>::quiet_NaN();
    double valid_per_step = std::numeric_limits<double>::quiet_NaN();
    bool improved = false;
    double seconds = 0.0;
};

std::string metrics_json(const EpochMetrics &m, bool bits);

struct TrainResult {
    std::vector<EpochMetrics> history;
    std::size_t updates = 0;
    bool aborted = false;       // non-finite loss
    std::string abort_reason;
    bool early_stopped = false;
    bool budget_exhausted = false;
    int best_epoch = -1;
    double best_valid = std::numeric_limits<double>::infinity();
};

// Loss per sequence, used to observe individual updates in tests.
using UpdateHook = std::function<void(std::size_t update, double loss)>;

// One update per sequence: optional weight noise, loss and gradient (output
// clip at the head, LSTM clip in BPTT), then the optimizer step on the clean
// weights. Hidden state is carried between sequences and reset every
// `reset_period` sequences; gradients stop at sequence boundaries. After
// each epoch the validation loss drives early stopping; the best weights are
// kept in `model`. A non-finite loss aborts and leaves the last finite
// weights in place (and in the checkpoint, when configured).
TrainResult train_loop(Model &model, Optimizer &optimizer, const Objective &train,
                       const Objective *valid, const TrainConfig &cfg,
                       std::ostream *metrics = nullptr, const UpdateHook &hook = {});

struct EvalResult {
    double loss = 0.0; // nats
    std::size_t steps = 0;
    std::size_t sequences = 0;
    double per_step() const { return steps ? loss / static_cast<double>(steps) : 0.0; }
    double bits_per_step() const;
};

// Frozen-weight pass. `stateful` carries the state across sequences in order.
EvalResult evaluate(const ParamStore &params, const Objective &data, bool stateful);

struct DynamicEvalResult {
    EvalResult static_pass;
    EvalResult dynamic_pass;
};

// Static pass, then a pass over the same data in which each sequence is
// scored and only afterwards used for a weight update. Works on a copy, so
// `params` is untouched. The state is carried across sequences.
DynamicEvalResult dynamic_evaluate(const ParamStore &params, const Objective &data,
                                   const OptimizerConfig &optimizer,
                                   const GradientConfig &clip = {});

} // namespace scribe

#include "scribe/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>

#include <json.hpp>

#include "scribe/checkpoint.hpp"

namespace scribe {

PerturbedWeights::PerturbedWeights(ParamStore &params, double std, Rng &rng) : params_(params) {
    if (std < 0.0) throw std::invalid_argument("weight noise std must be >= 0");
    if (std == 0.0) return;
    auto w = params_.flat();
    clean_.assign(w.begin(), w.end());
    for (double &x : w) x += std * rng.normal();
    active_ = true;
}

PerturbedWeights::~PerturbedWeights() { restore(); }

void PerturbedWeights::restore() {
    if (!active_) return;
    std::copy(clean_.begin(), clean_.end(), params_.flat().begin());
    active_ = false;
}

void TrainConfig::validate() const {
    if (clip.output_clip.lo > clip.output_clip.hi || clip.lstm_clip.lo > clip.lstm_clip.hi)
        throw std::invalid_argument("clip ranges must be ordered");
    if (weight_noise_std < 0.0) throw std::invalid_argument("weight noise std must be >= 0");
    if (reset_period == 0) throw std::invalid_argument("reset period must be >= 1");
    if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
    if (patience < 1) throw std::invalid_argument("patience must be >= 1");
    if (max_seconds < 0.0) throw std::invalid_argument("time budget must be >= 0");
}

namespace {

double json_number(double v) { return std::isfinite(v) ? v : 0.0; }

} // namespace

std::string metrics_json(const EpochMetrics &m, bool bits) {
    nlohmann::json j;
    j["epoch"] = m.epoch;
    j["updates"] = m.updates;
    j["train_loss"] = json_number(m.train_loss);
    j["train_nats_per_step"] = json_number(m.train_per_step);
    if (bits) j["train_bpc"] = json_number(m.train_per_step / std::numbers::ln2);
    if (std::isfinite(m.valid_loss)) {
        j["valid_loss"] = m.valid_loss;
        j["valid_nats_per_step"] = m.valid_per_step;
        if (bits) j["valid_bpc"] = m.valid_per_step / std::numbers::ln2;
    }
    j["improved"] = m.improved;
    j["seconds"] = m.seconds;
    return j.dump();
}

double EvalResult::bits_per_step() const { return bpc(loss, steps); }

EvalResult evaluate(const ParamStore &params, const Objective &data, bool stateful) {
    EvalResult r;
    NetworkState state = initial_state(params.arch());
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!stateful) state = initial_state(params.arch());
        r.loss += data.evaluate(params, i, state, stateful && i > 0, nullptr, {});
        r.steps += data.steps(i);
        ++r.sequences;
    }
    return r;
}

DynamicEvalResult dynamic_evaluate(const ParamStore &params, const Objective &data,
                                   const OptimizerConfig &optimizer, const GradientConfig &clip) {
    DynamicEvalResult r;
    r.static_pass = evaluate(params, data, true);

    ParamStore work = params;
    Optimizer opt(optimizer, work.size());
    ParamStore grad = work.zeros_like();
    NetworkState state = initial_state(work.arch());
    for (std::size_t i = 0; i < data.size(); ++i) {
        // Score first; the update below is the first to have seen sequence i.
        r.dynamic_pass.loss += data.evaluate(work, i, state, i > 0, &grad, clip);
        r.dynamic_pass.steps += data.steps(i);
        ++r.dynamic_pass.sequences;
        opt.step(work.flat(), grad.flat());
    }
    return r;
}

TrainResult train_loop(Model &model, Optimizer &optimizer, const Objective &train,
                       const Objective *valid, const TrainConfig &cfg, std::ostream *metrics,
                       const UpdateHook &hook) {
    cfg.validate();
    if (train.size() == 0) throw std::invalid_argument("train_loop: no training sequences");
    ParamStore &params = model.params;
    if (optimizer.size() != params.size())
        throw std::invalid_argument("train_loop: optimizer does not match the parameters");

    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - start).count(); };

    TrainResult result;
    Rng rng(cfg.seed);
    ParamStore grad = params.zeros_like();
    Vec last_good(params.flat().begin(), params.flat().end());
    Vec best(last_good);
    int since_best = 0;
    std::vector<std::size_t> order(train.size());

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        if (cfg.shuffle)
            for (std::size_t i = order.size(); i > 1; --i)
                std::swap(order[i - 1], order[rng.uniform_index(i)]);

        EpochMetrics em;
        em.epoch = epoch;
        std::size_t steps = 0, seqs = 0;
        NetworkState state = initial_state(params.arch());
        std::size_t since_reset = 0;
        bool stop = false;
        for (std::size_t k = 0; k < order.size(); ++k) {
            if (since_reset == cfg.reset_period) {
                state = initial_state(params.arch());
                since_reset = 0;
            }
            const bool continued = since_reset > 0;
            ++since_reset;

            double loss;
            try {
                PerturbedWeights noisy(params, cfg.weight_noise_std, rng);
                loss = train.evaluate(params, order[k], state, continued, &grad, cfg.clip);
            } catch (const NumericError &e) {
                result.aborted = true;
                result.abort_reason = e.what();
                break;
            }
            if (!std::isfinite(loss) || !all_finite(grad.flat())) {
                result.aborted = true;
                result.abort_reason = "non-finite loss at update " + std::to_string(result.updates);
                break;
            }
            optimizer.step(params.flat(), grad.flat());
            if (!all_finite(params.flat())) {
                result.aborted = true;
                result.abort_reason = "non-finite weights after update " +
                                      std::to_string(result.updates);
                break;
            }
            std::copy(params.flat().begin(), params.flat().end(), last_good.begin());
            ++result.updates;
            em.train_loss += loss;
            steps += train.steps(order[k]);
            ++seqs;
            if (hook) hook(result.updates, loss);
            if (cfg.max_updates && result.updates >= cfg.max_updates) stop = true;
            if (cfg.max_seconds > 0.0 && elapsed() >= cfg.max_seconds) stop = true;
            if (stop) {
                result.budget_exhausted = true;
                break;
            }
        }
        if (result.aborted) {
            std::copy(last_good.begin(), last_good.end(), params.flat().begin());
            if (!cfg.checkpoint.empty()) save_checkpoint(cfg.checkpoint, model, &optimizer);
            break;
        }

        em.updates = result.updates;
        em.train_per_step = steps ? em.train_loss / static_cast<double>(steps) : 0.0;
        em.train_loss = seqs ? em.train_loss / static_cast<double>(seqs) : 0.0;
        bool improved = true;
        if (valid && valid->size() > 0) {
            const EvalResult v = evaluate(params, *valid, valid->reports_bits());
            em.valid_loss = v.loss / static_cast<double>(v.sequences);
            em.valid_per_step = v.per_step();
            improved = em.valid_per_step < result.best_valid;
            if (improved) result.best_valid = em.valid_per_step;
        }
        em.improved = improved;
        em.seconds = elapsed();
        if (improved) {
            result.best_epoch = epoch;
            best.assign(params.flat().begin(), params.flat().end());
            since_best = 0;
            if (!cfg.checkpoint.empty()) save_checkpoint(cfg.checkpoint, model, &optimizer);
        } else {
            ++since_best;
        }
        result.history.push_back(em);
        if (metrics) *metrics << metrics_json(em, train.reports_bits()) << '\n' << std::flush;
        if (since_best >= cfg.patience) {
            result.early_stopped = true;
            break;
        }
        if (stop) break;
    }
    if (!result.aborted && valid && valid->size() > 0 && result.best_epoch > 0)
        std::copy(best.begin(), best.end(), params.flat().begin());
    return result;
}

} // namespace scribe

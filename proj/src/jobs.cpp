#include "scribe/jobs.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "scribe/checkpoint.hpp"
#include "scribe/mdn.hpp"

namespace scribe {

const std::set<std::string> &train_config_keys() {
    static const std::set<std::string> keys = {
        "task", "data", "valid_data", "granularity", "vocab_limit", "seq_len", "valid_fraction",
        "train_manifest", "valid_manifest", "max_step", "toy_symbols", "toy_motif_len",
        "toy_sequences", "toy_noise", "toy_seed", "alphabet", "layers", "mixtures",
        "window_components", "init_scale", "init_checkpoint", "optimizer", "learning_rate",
        "momentum", "rms_decay", "rms_momentum", "rms_epsilon", "output_clip", "lstm_clip",
        "weight_noise", "reset_period", "shuffle", "epochs", "patience", "seed", "max_updates",
        "max_seconds", "checkpoint", "metrics"};
    return keys;
}

TrainConfig train_config_from(const ConfigFile &cfg) {
    TrainConfig t;
    OptimizerConfig &o = t.optimizer;
    o.kind = parse_optimizer(cfg.get("optimizer", "rmsprop"));
    const double lr = cfg.get_double("learning_rate", 1e-4);
    o.rmsprop.learning_rate = lr;
    o.learning_rate = lr;
    o.momentum = cfg.get_double("momentum", 0.9);
    o.rmsprop.decay = cfg.get_double("rms_decay", 0.95);
    o.rmsprop.momentum = cfg.get_double("rms_momentum", 0.9);
    o.rmsprop.epsilon = cfg.get_double("rms_epsilon", 1e-4);
    t.clip.output_clip = cfg.get_clip("output_clip", {-100.0, 100.0});
    t.clip.lstm_clip = cfg.get_clip("lstm_clip", {-10.0, 10.0});
    t.weight_noise_std = cfg.get_double("weight_noise", 0.0);
    // Text chunks continue one another; stroke sequences are independent.
    const bool text = cfg.get("task", "") == "text";
    const std::string reset = cfg.get("reset_period", text ? "never" : "1");
    if (reset == "never" || reset == "inf") {
        t.reset_period = kNeverReset;
    } else {
        const long long r = cfg.get_int("reset_period", 1);
        if (r < 1) throw std::invalid_argument("reset_period must be >= 1 or 'never'");
        t.reset_period = static_cast<std::size_t>(r);
    }
    t.shuffle = cfg.get_bool("shuffle", false);
    t.epochs = static_cast<int>(cfg.get_int("epochs", 1));
    t.patience = static_cast<int>(cfg.get_int("patience", 3));
    t.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
    const long long mu = cfg.get_int("max_updates", 0);
    if (mu < 0) throw std::invalid_argument("max_updates must be >= 0");
    t.max_updates = static_cast<std::size_t>(mu);
    t.max_seconds = cfg.get_double("max_seconds", 0.0);
    t.checkpoint = cfg.get("checkpoint");
    t.validate();
    return t;
}

namespace {

std::string read_text(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<StrokeSeq> tail_split(std::vector<StrokeSeq> &all, double fraction) {
    const auto n_valid = static_cast<std::size_t>(std::floor(static_cast<double>(all.size()) * fraction));
    std::vector<StrokeSeq> valid(all.end() - static_cast<std::ptrdiff_t>(n_valid), all.end());
    all.resize(all.size() - n_valid);
    return valid;
}

Alphabet alphabet_from(const ConfigFile &cfg, const std::vector<StrokeSeq> &train,
                       const std::optional<Alphabet> &fallback) {
    const std::string spec = cfg.get("alphabet", fallback ? "" : "standard");
    if (spec.empty()) return *fallback;
    if (spec == "standard") return Alphabet::standard();
    if (spec == "data") {
        std::string chars;
        for (const StrokeSeq &s : train) chars += s.text;
        return Alphabet::from_chars(chars);
    }
    if (spec.rfind("chars:", 0) == 0) return Alphabet::from_chars(spec.substr(6));
    throw std::invalid_argument("alphabet must be standard, data or chars:<list>");
}

} // namespace

TrainJob prepare_train_job(const ConfigFile &cfg) {
    cfg.check_known(train_config_keys());
    TrainJob job;
    job.train = train_config_from(cfg);
    const std::string task = cfg.get("task");
    const std::uint64_t seed = job.train.seed;
    const double init_scale = cfg.get_double("init_scale", 0.1);
    const std::vector<int> layers = cfg.get_int_list("layers", {64});
    const double valid_fraction = cfg.get_double("valid_fraction", 0.05);
    const std::string init_ck = cfg.get("init_checkpoint", "");
    std::optional<Checkpoint> resume;
    if (!init_ck.empty()) resume = load_checkpoint(init_ck);

    if (task == "text") {
        const auto seq_len = static_cast<std::size_t>(cfg.get_int("seq_len", 100));
        const Granularity gran = parse_granularity(cfg.get("granularity", "char"));
        const auto limit = static_cast<int>(cfg.get_int("vocab_limit", 0));
        TextCorpus corpus = load_text_corpus(cfg.get("data"), gran, limit);
        std::vector<int> train_syms, valid_syms;
        if (resume) {
            if (!resume->model.vocab) throw std::invalid_argument("init_checkpoint is not a text model");
            corpus.vocab = *resume->model.vocab;
            corpus.symbols = encode_text(read_text(cfg.get("data")), corpus.vocab);
        }
        if (cfg.has("valid_data")) {
            train_syms = corpus.symbols;
            valid_syms = encode_text(read_text(cfg.get("valid_data")), corpus.vocab);
        } else {
            TextSplit split = split_tail(corpus.symbols, valid_fraction);
            train_syms = std::move(split.train);
            valid_syms = std::move(split.valid);
        }
        job.model = resume ? resume->model : make_text_model(corpus.vocab, layers, seed, init_scale);
        const int K = corpus.vocab.size();
        job.data.train = std::make_unique<TextObjective>(chunk_symbols(train_syms, seq_len), K);
        if (!valid_syms.empty())
            job.data.valid = std::make_unique<TextObjective>(chunk_symbols(valid_syms, seq_len), K);
    } else if (task == "handwriting" || task == "synthesis") {
        const bool synth = task == "synthesis";
        std::vector<StrokeSeq> train, valid;
        std::optional<Alphabet> default_alphabet;
        const std::string data = cfg.get("data");
        if (data == "toy") {
            ToyGlyphOptions o;
            o.n_symbols = static_cast<int>(cfg.get_int("toy_symbols", o.n_symbols));
            o.motif_len = static_cast<int>(cfg.get_int("toy_motif_len", o.motif_len));
            o.n_sequences = static_cast<int>(cfg.get_int("toy_sequences", o.n_sequences));
            o.noise_std = cfg.get_double("toy_noise", o.noise_std);
            o.seed = static_cast<std::uint64_t>(cfg.get_int("toy_seed", 1));
            ToyGlyphCorpus toy = make_toy_glyph_corpus(o);
            train = std::move(toy.sequences);
            default_alphabet = toy.alphabet;
            valid = tail_split(train, valid_fraction);
        } else {
            StrokeLoadOptions lo;
            lo.max_step = cfg.get_double("max_step", lo.max_step);
            std::vector<StrokeSeq> all = load_strokes(data, lo);
            if (cfg.has("train_manifest")) {
                train = select_lines(all, load_manifest(cfg.get("train_manifest")));
                if (cfg.has("valid_manifest"))
                    valid = select_lines(all, load_manifest(cfg.get("valid_manifest")));
            } else {
                train = std::move(all);
                if (!cfg.has("valid_data")) valid = tail_split(train, valid_fraction);
            }
            if (cfg.has("valid_data")) valid = load_strokes(cfg.get("valid_data"), lo);
        }
        if (train.empty()) throw std::invalid_argument("no training sequences");
        const int M = static_cast<int>(cfg.get_int("mixtures", 20));
        NormStats stats;
        if (resume) {
            job.model = resume->model;
            if (!job.model.norm) throw std::invalid_argument("init_checkpoint is not a stroke model");
            stats = *job.model.norm;
        } else {
            stats = compute_norm_stats(train);
            if (synth) {
                const Alphabet alphabet = alphabet_from(cfg, train, default_alphabet);
                job.model = make_synthesis_model(
                    layers, M, static_cast<int>(cfg.get_int("window_components", 10)), alphabet,
                    stats, seed, init_scale);
            } else {
                job.model = make_handwriting_model(layers, M, stats, seed, init_scale);
            }
        }
        if (job.model.is_synthesis() != synth)
            throw std::invalid_argument("init_checkpoint does not match task " + task);
        std::optional<Alphabet> alpha = synth ? job.model.alphabet : std::nullopt;
        const int comps = job.model.mixture_components;
        job.data.train =
            std::make_unique<StrokeObjective>(apply_norm(train, stats), comps, alpha);
        if (!valid.empty())
            job.data.valid =
                std::make_unique<StrokeObjective>(apply_norm(valid, stats), comps, alpha);
    } else {
        throw std::invalid_argument("task must be text, handwriting or synthesis");
    }

    if (resume && resume->optimizer && resume->optimizer->config.kind == job.train.optimizer.kind) {
        job.optimizer = *resume->optimizer;
        job.optimizer.config = job.train.optimizer;
    } else {
        job.optimizer = Optimizer(job.train.optimizer, job.model.params.size());
    }
    return job;
}

TrainResult run_train_job(TrainJob &job, std::ostream &metrics) {
    TrainResult r = train_loop(job.model, job.optimizer, *job.data.train, job.data.valid.get(),
                               job.train, &metrics);
    // Without a validation split no epoch counts as "improved" against
    // anything, so the final weights are written here.
    if (!r.aborted && !job.train.checkpoint.empty() && r.best_epoch < 0)
        save_checkpoint(job.train.checkpoint, job.model, &job.optimizer);
    return r;
}

std::unique_ptr<Objective> load_eval_data(const Model &model, const std::filesystem::path &path,
                                          std::size_t seq_len) {
    if (model.head == HeadKind::Softmax) {
        const std::vector<int> syms = encode_text(read_text(path), *model.vocab);
        if (syms.empty()) throw std::runtime_error(path.string() + " is empty");
        return std::make_unique<TextObjective>(chunk_symbols(syms, seq_len), model.vocab->size());
    }
    std::vector<StrokeSeq> seqs = load_strokes(path);
    if (seqs.empty()) throw std::runtime_error(path.string() + " has no sequences");
    std::optional<Alphabet> alpha = model.is_synthesis() ? model.alphabet : std::nullopt;
    return std::make_unique<StrokeObjective>(apply_norm(seqs, model.norm.value_or(NormStats{})),
                                             model.mixture_components, alpha);
}

} // namespace scribe

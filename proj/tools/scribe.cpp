// scribe: train, sample, evaluate and render sequence models.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "scribe/checkpoint.hpp"
#include "scribe/config.hpp"
#include "scribe/data_io.hpp"
#include "scribe/jobs.hpp"
#include "scribe/kernels.hpp"
#include "scribe/sampler.hpp"
#include "scribe/trainer.hpp"
#include "scribe/viz.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace scribe;

namespace {

// Bad input the user can fix (missing files, wrong model type, bad values).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void write_output(const std::string &path, const std::string &content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write " + path);
    out << content;
}

void fail(const std::string &msg) {
    std::cerr << json{{"error", msg}}.dump() << '\n';
}

struct TrainArgs {
    std::string config;
    std::string metrics;
    std::vector<std::string> overrides;
    long long seed = -1;
};

int cmd_train(const TrainArgs &a) {
    ConfigFile cfg = ConfigFile::load(a.config);
    for (const std::string &kv : a.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (a.seed >= 0) cfg.set("seed", std::to_string(a.seed));
    TrainJob job = prepare_train_job(cfg);
    std::string metrics_path = a.metrics.empty() ? cfg.get("metrics", "") : a.metrics;
    std::ofstream file;
    std::ostream *out = &std::cout;
    if (!metrics_path.empty() && metrics_path != "-") {
        file.open(metrics_path);
        if (!file) throw UsageError("cannot write " + metrics_path);
        out = &file;
    }
    const TrainResult r = run_train_job(job, *out);
    json summary{{"updates", r.updates},
                 {"epochs", r.history.size()},
                 {"best_epoch", r.best_epoch},
                 {"early_stopped", r.early_stopped},
                 {"budget_exhausted", r.budget_exhausted},
                 {"checkpoint", job.train.checkpoint.string()}};
    if (r.aborted) {
        summary["aborted"] = r.abort_reason;
        std::cerr << json{{"error", "training aborted: " + r.abort_reason}}.dump() << '\n';
        std::cout << summary.dump() << '\n';
        return 1;
    }
    if (out != &std::cout) std::cout << summary.dump() << '\n';
    return 0;
}

struct SampleArgs {
    std::string checkpoint, mode = "text", text, out, phi, prime_strokes, prime_text;
    std::size_t length = 200, steps = kDefaultHandwritingSteps, max_steps = 0;
    double bias = 0.0;
    std::uint64_t seed = 1;
    bool greedy = false, fixed_length = false;
};

int cmd_sample(const SampleArgs &a) {
    const Checkpoint ck = load_checkpoint(a.checkpoint);
    const Model &m = ck.model;
    if (!(a.bias >= 0.0)) throw UsageError("--bias must be >= 0");
    if (a.mode == "text") {
        if (m.head != HeadKind::Softmax) throw UsageError("checkpoint is not a text model");
        TextSampleConfig c;
        c.length = a.length;
        c.seed = a.seed;
        c.prime = a.text;
        c.greedy = a.greedy;
        write_output(a.out, sample_text(m, c));
        return 0;
    }
    if (a.mode == "handwriting") {
        if (m.head != HeadKind::Mixture || m.is_synthesis())
            throw UsageError("checkpoint is not a handwriting prediction model");
        const StrokeSeq s = sample_handwriting(m, a.steps, a.seed, a.bias);
        write_output(a.out, stroke_to_json_line(s) + "\n");
        return 0;
    }
    if (a.mode == "synth") {
        if (!m.is_synthesis()) throw UsageError("checkpoint is not a synthesis model");
        if (a.text.empty()) throw UsageError("--text is required for synthesis");
        SampleConfig c;
        c.bias = a.bias;
        c.seed = a.seed;
        c.max_steps = a.max_steps;
        c.stop = a.fixed_length ? StopMode::FixedLength : StopMode::Heuristic;
        StrokeSeq prime;
        if (!a.prime_strokes.empty()) {
            auto seqs = load_strokes(a.prime_strokes);
            if (seqs.empty()) throw UsageError(a.prime_strokes + " has no sequences");
            prime = seqs.front();
        }
        const std::string prime_text = a.prime_text.empty() ? prime.text : a.prime_text;
        const SynthResult r = prime.points.empty() && a.prime_text.empty()
                                  ? synth_sample(m, a.text, c)
                                  : primed_sample(m, prime, prime_text, a.text, c);
        write_output(a.out, stroke_to_json_line(r.strokes) + "\n");
        if (!a.phi.empty()) save_matrix(a.phi, r.phi);
        json info{{"points", r.strokes.points.size()},
                  {"steps", r.phi.rows()},
                  {"prime_steps", r.prime_steps},
                  {"stopped", r.stopped},
                  {"truncated", r.truncated}};
        (a.out.empty() || a.out == "-" ? std::cerr : std::cout) << info.dump() << '\n';
        return 0;
    }
    throw UsageError("--mode must be text, handwriting or synth");
}

struct EvalArgs {
    std::string checkpoint, data, optimizer;
    bool dynamic = false;
    std::size_t seq_len = 100;
    double lr = -1.0;
};

int cmd_eval(const EvalArgs &a) {
    const Checkpoint ck = load_checkpoint(a.checkpoint);
    const Model &m = ck.model;
    const auto data = load_eval_data(m, a.data, a.seq_len);
    const bool text = m.head == HeadKind::Softmax;
    json j;
    auto describe = [&](const EvalResult &r) {
        json o{{"loss_nats", r.loss},
               {"steps", r.steps},
               {"sequences", r.sequences},
               {"nats_per_step", r.per_step()},
               {"loss_per_sequence", r.loss / static_cast<double>(r.sequences)}};
        if (text) o["bpc"] = r.bits_per_step();
        return o;
    };
    if (!a.dynamic) {
        j = describe(evaluate(m.params, *data, text));
    } else {
        OptimizerConfig oc = ck.optimizer ? ck.optimizer->config : OptimizerConfig{};
        if (!a.optimizer.empty()) oc.kind = parse_optimizer(a.optimizer);
        if (a.lr >= 0.0) {
            oc.learning_rate = a.lr;
            oc.rmsprop.learning_rate = a.lr;
        }
        GradientConfig clip{{-100.0, 100.0}, text ? ClipRange{-1.0, 1.0} : ClipRange{-10.0, 10.0}};
        const DynamicEvalResult r = dynamic_evaluate(m.params, *data, oc, clip);
        j["static"] = describe(r.static_pass);
        j["dynamic"] = describe(r.dynamic_pass);
        if (text) {
            j["static_bpc"] = r.static_pass.bits_per_step();
            j["dynamic_bpc"] = r.dynamic_pass.bits_per_step();
        }
    }
    std::cout << j.dump() << '\n';
    return 0;
}

struct VizArgs {
    std::string input, kind = "strokes", out, checkpoint, ramp = "heat";
    std::size_t line = 0;
    RenderSpec spec;
};

int cmd_viz(VizArgs a) {
    a.spec.ramp = a.ramp == "gray" ? ColorRamp::Gray : ColorRamp::Heat;
    if (a.ramp != "gray" && a.ramp != "heat") throw UsageError("--ramp must be heat or gray");
    std::string svg;
    auto stroke_line = [&] {
        const auto seqs = load_strokes(a.input);
        if (a.line >= seqs.size())
            throw UsageError(a.input + " has only " + std::to_string(seqs.size()) + " sequences");
        return seqs[a.line];
    };
    if (a.kind == "strokes") {
        svg = render_strokes_svg(stroke_line(), a.spec);
    } else if (a.kind == "window") {
        svg = render_window_heatmap(load_matrix(a.input), a.spec);
    } else if (a.kind == "density") {
        if (a.checkpoint.empty()) throw UsageError("--kind density needs --checkpoint");
        const Checkpoint ck = load_checkpoint(a.checkpoint);
        if (ck.model.head != HeadKind::Mixture) throw UsageError("checkpoint is not a stroke model");
        svg = render_density_heatmap(ck.model, stroke_line(), a.spec);
    } else {
        throw UsageError("--kind must be strokes, window or density");
    }
    write_output(a.out, svg);
    return 0;
}

struct ToyArgs {
    std::string out;
    ToyGlyphOptions opts;
};

int cmd_toy(const ToyArgs &a) {
    const ToyGlyphCorpus c = make_toy_glyph_corpus(a.opts);
    save_strokes(a.out, c.sequences);
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Sequence models with LSTM stacks, mixture outputs and soft windows"};
    app.require_subcommand(1);
    std::string kernel_name;
    app.add_option("--kernels", kernel_name, "Kernel backend: scalar, avx2 or neon");

    TrainArgs ta;
    auto *train = app.add_subcommand("train", "Train a model from a key=value config");
    train->add_option("--config", ta.config)->required()->check(CLI::ExistingFile);
    train->add_option("--metrics", ta.metrics, "Per-epoch JSON lines (default: stdout)");
    train->add_option("--set", ta.overrides, "Override a config key (key=value)");
    train->add_option("--seed", ta.seed, "Override the config seed");

    SampleArgs sa;
    auto *sample = app.add_subcommand("sample", "Generate text or pen strokes");
    sample->add_option("--checkpoint", sa.checkpoint)->required()->check(CLI::ExistingFile);
    sample->add_option("--mode", sa.mode)->check(CLI::IsMember({"text", "handwriting", "synth"}));
    sample->add_option("--text", sa.text, "Text to write (synth) or prime (text)");
    sample->add_option("--length", sa.length, "Symbols to generate (text)");
    sample->add_option("--steps", sa.steps, "Points to generate (handwriting)");
    sample->add_option("--max-steps", sa.max_steps, "Step cap for synthesis (0 = 60U+300)");
    sample->add_option("--bias", sa.bias, "Probability bias b >= 0");
    sample->add_option("--seed", sa.seed);
    sample->add_option("--out", sa.out, "Output file (default: stdout)");
    sample->add_option("--phi", sa.phi, "Write the window trace matrix here (synth)");
    sample->add_option("--prime-strokes", sa.prime_strokes, "JSON-lines file; first line primes")
        ->check(CLI::ExistingFile);
    sample->add_option("--prime-text", sa.prime_text, "Transcript of the prime strokes");
    sample->add_flag("--greedy", sa.greedy, "Argmax decoding (text)");
    sample->add_flag("--fixed-length", sa.fixed_length, "Ignore the stop heuristic (synth)");

    EvalArgs ea;
    auto *eval = app.add_subcommand("eval", "Score a dataset");
    eval->add_option("--checkpoint", ea.checkpoint)->required()->check(CLI::ExistingFile);
    eval->add_option("--data", ea.data)->required()->check(CLI::ExistingFile);
    eval->add_flag("--dynamic", ea.dynamic, "Also run dynamic evaluation");
    eval->add_option("--seq-len", ea.seq_len, "Text chunk length");
    eval->add_option("--lr", ea.lr, "Learning rate for dynamic evaluation");
    eval->add_option("--optimizer", ea.optimizer, "rmsprop or momentum (dynamic evaluation)");
    std::uint64_t eval_seed = 0;
    eval->add_option("--seed", eval_seed, "Accepted for uniformity; evaluation is deterministic");

    VizArgs va;
    auto *viz = app.add_subcommand("viz", "Render strokes, window traces or density maps as SVG");
    viz->add_option("--input", va.input)->required()->check(CLI::ExistingFile);
    viz->add_option("--kind", va.kind)->check(CLI::IsMember({"strokes", "window", "density"}));
    viz->add_option("--out", va.out, "SVG file (default: stdout)");
    viz->add_option("--checkpoint", va.checkpoint, "Model for --kind density")
        ->check(CLI::ExistingFile);
    viz->add_option("--line", va.line, "Which sequence of the input file to draw");
    viz->add_option("--width", va.spec.width);
    viz->add_option("--height", va.spec.height);
    viz->add_option("--grid", va.spec.grid, "Heatmap cells along the wider axis");
    viz->add_option("--stroke-width", va.spec.stroke_width);
    viz->add_option("--ramp", va.ramp, "heat or gray");
    std::uint64_t viz_seed = 0;
    viz->add_option("--seed", viz_seed, "Accepted for uniformity; rendering is deterministic");

    ToyArgs toy;
    auto *mk = app.add_subcommand("make-toy", "Write the synthetic glyph corpus as JSON lines");
    mk->add_option("--out", toy.out)->required();
    mk->add_option("--symbols", toy.opts.n_symbols);
    mk->add_option("--motif-len", toy.opts.motif_len);
    mk->add_option("--sequences", toy.opts.n_sequences);
    mk->add_option("--noise", toy.opts.noise_std);
    mk->add_option("--seed", toy.opts.seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        fail(e.what());
        return 2;
    }

    try {
        if (!kernel_name.empty()) kernels::select_backend(kernels::parse_backend(kernel_name));
        if (*train) return cmd_train(ta);
        if (*sample) return cmd_sample(sa);
        if (*eval) return cmd_eval(ea);
        if (*viz) return cmd_viz(va);
        if (*mk) return cmd_toy(toy);
    } catch (const UsageError &e) {
        fail(e.what());
        return 2;
    } catch (const std::invalid_argument &e) {
        fail(e.what());
        return 2;
    } catch (const std::exception &e) {
        fail(e.what());
        return 1;
    }
    return 0;
}

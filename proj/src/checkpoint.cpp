#include "scribe/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace scribe {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'S', 'C', 'R', 'I', 'B', 'E', 'C', 'K'};

template <typename T> T to_little(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
        std::memcpy(&v, b, sizeof(T));
    }
    return v;
}

template <typename T> void write_scalar(std::ostream &out, T v) {
    v = to_little(v);
    out.write(reinterpret_cast<const char *>(&v), sizeof(T));
}

template <typename T> T read_scalar(std::istream &in) {
    T v{};
    in.read(reinterpret_cast<char *>(&v), sizeof(T));
    if (!in) throw std::runtime_error("checkpoint truncated");
    return to_little(v);
}

void write_doubles(std::ostream &out, std::span<const double> v) {
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char *>(v.data()),
                  static_cast<std::streamsize>(v.size() * sizeof(double)));
    } else {
        for (double d : v) write_scalar(out, d);
    }
}

void read_doubles(std::istream &in, std::span<double> v) {
    if constexpr (std::endian::native == std::endian::little) {
        in.read(reinterpret_cast<char *>(v.data()),
                static_cast<std::streamsize>(v.size() * sizeof(double)));
        if (!in) throw std::runtime_error("checkpoint truncated");
    } else {
        for (double &d : v) d = read_scalar<double>(in);
    }
}

json symbols_to_json(const std::vector<std::string> &symbols) {
    json arr = json::array();
    for (const std::string &s : symbols) {
        json bytes = json::array();
        for (unsigned char c : s) bytes.push_back(static_cast<int>(c));
        arr.push_back(std::move(bytes));
    }
    return arr;
}

std::vector<std::string> symbols_from_json(const json &arr) {
    std::vector<std::string> out;
    for (const json &bytes : arr) {
        std::string s;
        for (const json &b : bytes) s += static_cast<char>(b.get<int>());
        out.push_back(std::move(s));
    }
    return out;
}

json arch_to_json(const Architecture &a) {
    return {{"input_size", a.input_size},       {"layer_widths", a.layer_widths},
            {"output_size", a.output_size},     {"has_window", a.has_window},
            {"window_components", a.window_components}, {"alphabet_size", a.alphabet_size}};
}

Architecture arch_from_json(const json &j) {
    Architecture a;
    a.input_size = j.at("input_size").get<int>();
    a.layer_widths = j.at("layer_widths").get<std::vector<int>>();
    a.output_size = j.at("output_size").get<int>();
    a.has_window = j.at("has_window").get<bool>();
    a.window_components = j.at("window_components").get<int>();
    a.alphabet_size = j.at("alphabet_size").get<int>();
    return a;
}

} // namespace

void save_checkpoint(const std::filesystem::path &path, const Model &model,
                     const Optimizer *optimizer) {
    model.validate();
    json h;
    h["architecture"] = arch_to_json(model.arch());
    h["head"] = std::string(head_name(model.head));
    h["mixture_components"] = model.mixture_components;
    h["parameters"] = model.params.size();
    if (model.vocab) {
        h["vocab"] = {{"granularity", std::string(granularity_name(model.vocab->granularity))},
                      {"symbols", symbols_to_json(model.vocab->symbols)},
                      {"unknown", model.vocab->unknown}};
    }
    if (model.norm) {
        const NormStats &n = *model.norm;
        h["norm"] = {{"mean", {n.mean_x, n.mean_y}}, {"std", {n.std_x, n.std_y}}};
    }
    if (model.alphabet) {
        h["alphabet"] = {{"symbols", symbols_to_json(model.alphabet->symbols)},
                         {"non_letter", model.alphabet->non_letter}};
    }
    std::vector<std::span<const double>> buffers;
    if (optimizer) {
        const OptimizerConfig &c = optimizer->config;
        json o;
        o["kind"] = std::string(optimizer_name(c.kind));
        o["rmsprop"] = {{"decay", c.rmsprop.decay},
                        {"momentum", c.rmsprop.momentum},
                        {"learning_rate", c.rmsprop.learning_rate},
                        {"epsilon", c.rmsprop.epsilon}};
        o["learning_rate"] = c.learning_rate;
        o["momentum"] = c.momentum;
        o["steps"] = optimizer->steps;
        if (optimizer->size() != model.params.size())
            throw std::invalid_argument("optimizer state does not match the parameters");
        if (c.kind == OptimizerKind::Rmsprop) {
            o["buffers"] = {"n", "g", "delta"};
            buffers = {optimizer->rms.n, optimizer->rms.g, optimizer->rms.delta};
        } else {
            o["buffers"] = {"velocity"};
            buffers = {optimizer->velocity};
        }
        h["optimizer"] = std::move(o);
    }

    const std::string header = h.dump();
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(kMagic, sizeof(kMagic));
        write_scalar<std::uint32_t>(out, kCheckpointVersion);
        write_scalar<std::uint64_t>(out, header.size());
        out.write(header.data(), static_cast<std::streamsize>(header.size()));
        write_doubles(out, model.params.flat());
        for (auto b : buffers) write_doubles(out, b);
        out.flush();
        if (!out) throw std::runtime_error("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error(path.string() + " is not a checkpoint");
    const auto version = read_scalar<std::uint32_t>(in);
    if (version != kCheckpointVersion)
        throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
    const auto header_len = read_scalar<std::uint64_t>(in);
    if (header_len > (1ull << 32)) throw std::runtime_error("checkpoint header too large");
    std::string header(header_len, '\0');
    in.read(header.data(), static_cast<std::streamsize>(header_len));
    if (!in) throw std::runtime_error("checkpoint truncated");

    json h;
    try {
        h = json::parse(header);
    } catch (const json::exception &e) {
        throw std::runtime_error(std::string("checkpoint header: ") + e.what());
    }

    Checkpoint ck;
    try {
        Model &m = ck.model;
        const Architecture arch = arch_from_json(h.at("architecture"));
        arch.validate();
        m.head = parse_head(h.at("head").get<std::string>());
        m.mixture_components = h.at("mixture_components").get<int>();
        m.params = ParamStore(arch);
        if (h.at("parameters").get<std::size_t>() != m.params.size())
            throw std::runtime_error("parameter count does not match the architecture");
        if (h.contains("vocab")) {
            Vocab v;
            v.granularity = parse_granularity(h["vocab"].at("granularity").get<std::string>());
            v.symbols = symbols_from_json(h["vocab"].at("symbols"));
            v.unknown = h["vocab"].at("unknown").get<int>();
            v.rebuild_index();
            m.vocab = std::move(v);
        }
        if (h.contains("norm")) {
            NormStats n;
            n.mean_x = h["norm"].at("mean").at(0).get<double>();
            n.mean_y = h["norm"].at("mean").at(1).get<double>();
            n.std_x = h["norm"].at("std").at(0).get<double>();
            n.std_y = h["norm"].at("std").at(1).get<double>();
            m.norm = n;
        }
        if (h.contains("alphabet")) {
            Alphabet a;
            a.symbols = symbols_from_json(h["alphabet"].at("symbols"));
            a.non_letter = h["alphabet"].at("non_letter").get<int>();
            m.alphabet = std::move(a);
        }
        read_doubles(in, m.params.flat());
        m.validate();

        if (h.contains("optimizer")) {
            const json &o = h["optimizer"];
            OptimizerConfig c;
            c.kind = parse_optimizer(o.at("kind").get<std::string>());
            c.rmsprop.decay = o.at("rmsprop").at("decay").get<double>();
            c.rmsprop.momentum = o.at("rmsprop").at("momentum").get<double>();
            c.rmsprop.learning_rate = o.at("rmsprop").at("learning_rate").get<double>();
            c.rmsprop.epsilon = o.at("rmsprop").at("epsilon").get<double>();
            c.learning_rate = o.at("learning_rate").get<double>();
            c.momentum = o.at("momentum").get<double>();
            Optimizer opt(c, m.params.size());
            opt.steps = o.at("steps").get<std::uint64_t>();
            if (c.kind == OptimizerKind::Rmsprop) {
                read_doubles(in, opt.rms.n);
                read_doubles(in, opt.rms.g);
                read_doubles(in, opt.rms.delta);
            } else {
                read_doubles(in, opt.velocity);
            }
            ck.optimizer = std::move(opt);
        }
    } catch (const json::exception &e) {
        throw std::runtime_error(std::string("checkpoint header: ") + e.what());
    } catch (const std::invalid_argument &e) {
        throw std::runtime_error(std::string("checkpoint: ") + e.what());
    }
    return ck;
}

} // namespace scribe

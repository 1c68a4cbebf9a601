#include "scribe/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

namespace scribe {

using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> tokenize(std::string_view text, Granularity g) {
    std::vector<std::string> out;
    switch (g) {
    case Granularity::Byte:
        out.reserve(text.size());
        for (char c : text) out.emplace_back(1, c);
        break;
    case Granularity::Char:
        out = utf8_chars(text);
        break;
    case Granularity::Word: {
        std::string cur;
        auto flush = [&] {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        };
        for (char c : text) {
            if (c == '\n') {
                flush();
                out.emplace_back("\n");
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
                flush();
            } else {
                cur += c;
            }
        }
        flush();
        break;
    }
    }
    return out;
}

} // namespace

std::vector<std::string> utf8_chars(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        const auto b = static_cast<unsigned char>(text[i]);
        std::size_t len;
        if (b < 0x80) len = 1;
        else if ((b & 0xE0) == 0xC0 && b >= 0xC2) len = 2;
        else if ((b & 0xF0) == 0xE0) len = 3;
        else if ((b & 0xF8) == 0xF0 && b <= 0xF4) len = 4;
        else
            throw std::runtime_error("invalid UTF-8 lead byte at offset " + std::to_string(i));
        if (i + len > text.size())
            throw std::runtime_error("truncated UTF-8 sequence at offset " + std::to_string(i));
        for (std::size_t k = 1; k < len; ++k)
            if ((static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80)
                throw std::runtime_error("invalid UTF-8 continuation at offset " +
                                         std::to_string(i + k));
        out.emplace_back(text.substr(i, len));
        i += len;
    }
    return out;
}

TextCorpus build_text_corpus(std::string_view text, Granularity granularity, int vocab_limit) {
    if (text.empty()) throw std::runtime_error("text corpus is empty");
    const std::vector<std::string> tokens = tokenize(text, granularity);
    if (tokens.empty()) throw std::runtime_error("text corpus has no tokens");

    struct Stat {
        std::size_t count = 0;
        std::size_t first = 0;
    };
    std::unordered_map<std::string, Stat> stats;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        auto [it, inserted] = stats.try_emplace(tokens[i]);
        if (inserted) it->second.first = i;
        ++it->second.count;
    }
    std::vector<std::pair<std::string, Stat>> ordered(stats.begin(), stats.end());
    std::sort(ordered.begin(), ordered.end(), [](const auto &a, const auto &b) {
        if (a.second.count != b.second.count) return a.second.count > b.second.count;
        return a.second.first < b.second.first;
    });

    TextCorpus corpus;
    corpus.vocab.granularity = granularity;
    const bool limited = vocab_limit > 0 && ordered.size() > static_cast<std::size_t>(vocab_limit);
    const std::size_t keep = limited ? static_cast<std::size_t>(vocab_limit) : ordered.size();
    for (std::size_t i = 0; i < keep; ++i) corpus.vocab.symbols.push_back(ordered[i].first);
    if (limited || granularity == Granularity::Word) {
        corpus.vocab.unknown = static_cast<int>(corpus.vocab.symbols.size());
        corpus.vocab.symbols.emplace_back("<unk>");
    }
    corpus.vocab.rebuild_index();
    corpus.symbols.reserve(tokens.size());
    for (const std::string &tok : tokens) corpus.symbols.push_back(corpus.vocab.lookup(tok));
    return corpus;
}

TextCorpus load_text_corpus(const std::filesystem::path &path, Granularity granularity,
                            int vocab_limit) {
    return build_text_corpus(read_file(path), granularity, vocab_limit);
}

std::vector<int> encode_text(std::string_view text, const Vocab &vocab) {
    std::vector<int> out;
    for (const std::string &tok : tokenize(text, vocab.granularity)) {
        const int idx = vocab.lookup(tok);
        if (idx < 0) throw std::runtime_error("symbol not in vocabulary: '" + tok + "'");
        out.push_back(idx);
    }
    return out;
}

std::vector<std::vector<int>> chunk_symbols(std::span<const int> symbols, std::size_t chunk_len) {
    if (chunk_len == 0) throw std::invalid_argument("chunk_symbols: chunk length must be > 0");
    std::vector<std::vector<int>> chunks;
    for (std::size_t i = 0; i < symbols.size(); i += chunk_len) {
        const std::size_t end = std::min(symbols.size(), i + chunk_len);
        chunks.emplace_back(symbols.begin() + static_cast<std::ptrdiff_t>(i),
                            symbols.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return chunks;
}

TextSplit split_tail(std::span<const int> symbols, double valid_fraction) {
    if (valid_fraction < 0.0 || valid_fraction >= 1.0)
        throw std::invalid_argument("split_tail: fraction must be in [0, 1)");
    const auto n_valid =
        static_cast<std::size_t>(std::floor(static_cast<double>(symbols.size()) * valid_fraction));
    const std::size_t cut = symbols.size() - n_valid;
    return {{symbols.begin(), symbols.begin() + static_cast<std::ptrdiff_t>(cut)},
            {symbols.begin() + static_cast<std::ptrdiff_t>(cut), symbols.end()}};
}

// ─── Strokes ────────────────────────────────────────────────────────────────

namespace {

std::vector<StrokePoint> parse_triples(const json &arr, std::size_t line_no, const char *key) {
    if (!arr.is_array())
        throw std::runtime_error("line " + std::to_string(line_no) + ": '" + key +
                                 "' must be an array");
    std::vector<StrokePoint> pts;
    pts.reserve(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const json &p = arr[i];
        if (!p.is_array() || p.size() != 3 || !p[0].is_number() || !p[1].is_number() ||
            !p[2].is_number())
            throw std::runtime_error("line " + std::to_string(line_no) + ": point " +
                                     std::to_string(i) + " must be [x, y, eos]");
        const double eos = p[2].get<double>();
        if (eos != 0.0 && eos != 1.0)
            throw std::runtime_error("line " + std::to_string(line_no) + ": point " +
                                     std::to_string(i) + " has eos outside {0,1}");
        const double x = p[0].get<double>(), y = p[1].get<double>();
        if (!std::isfinite(x) || !std::isfinite(y))
            throw std::runtime_error("line " + std::to_string(line_no) + ": point " +
                                     std::to_string(i) + " is not finite");
        pts.push_back({x, y, static_cast<int>(eos)});
    }
    return pts;
}

} // namespace

std::vector<StrokePoint> repair_long_steps(std::span<const StrokePoint> offsets, double max_step) {
    std::vector<StrokePoint> out(offsets.begin(), offsets.end());
    if (!std::isfinite(max_step)) return out;
    // Work on absolute positions so a bad point can be moved between its
    // neighbours.
    struct Abs {
        double x, y;
        int eos;
    };
    std::vector<Abs> abs;
    abs.reserve(out.size() + 1);
    abs.push_back({0.0, 0.0, 0});
    for (const StrokePoint &p : out)
        abs.push_back({abs.back().x + p.dx, abs.back().y + p.dy, p.eos});
    for (std::size_t i = 1; i < abs.size();) {
        const bool pen_up_move = abs[i - 1].eos == 1;
        const double len = std::hypot(abs[i].x - abs[i - 1].x, abs[i].y - abs[i - 1].y);
        if (pen_up_move || len <= max_step) {
            ++i;
            continue;
        }
        if (i + 1 < abs.size()) {
            abs[i].x = 0.5 * (abs[i - 1].x + abs[i + 1].x);
            abs[i].y = 0.5 * (abs[i - 1].y + abs[i + 1].y);
            ++i;
        } else {
            abs[i - 1].eos = std::max(abs[i - 1].eos, abs[i].eos);
            abs.pop_back();
        }
    }
    out.clear();
    for (std::size_t i = 1; i < abs.size(); ++i)
        out.push_back({abs[i].x - abs[i - 1].x, abs[i].y - abs[i - 1].y, abs[i].eos});
    return out;
}

StrokeSeq parse_stroke_line(std::string_view line, const StrokeLoadOptions &opts,
                            std::size_t line_no) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error &e) {
        throw std::runtime_error("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!j.is_object())
        throw std::runtime_error("line " + std::to_string(line_no) + ": expected a JSON object");
    StrokeSeq seq;
    if (j.contains("text")) {
        if (!j["text"].is_string())
            throw std::runtime_error("line " + std::to_string(line_no) + ": 'text' must be a string");
        seq.text = j["text"].get<std::string>();
    }
    if (j.contains("strokes")) {
        seq.points = parse_triples(j["strokes"], line_no, "strokes");
    } else if (j.contains("points")) {
        const auto pts = parse_triples(j["points"], line_no, "points");
        for (std::size_t i = 1; i < pts.size(); ++i)
            seq.points.push_back({pts[i].dx - pts[i - 1].dx, pts[i].dy - pts[i - 1].dy, pts[i].eos});
    } else {
        throw std::runtime_error("line " + std::to_string(line_no) +
                                 ": needs a 'strokes' or 'points' array");
    }
    seq.points = repair_long_steps(seq.points, opts.max_step);
    if (seq.points.empty())
        throw std::runtime_error("line " + std::to_string(line_no) + ": sequence is empty");
    return seq;
}

std::vector<StrokeSeq> load_strokes(const std::filesystem::path &path,
                                    const StrokeLoadOptions &opts) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<StrokeSeq> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        out.push_back(parse_stroke_line(line, opts, line_no));
    }
    return out;
}

std::string stroke_to_json_line(const StrokeSeq &seq) {
    json pts = json::array();
    for (const StrokePoint &p : seq.points) pts.push_back({p.dx, p.dy, p.eos});
    json j;
    j["text"] = seq.text;
    j["strokes"] = std::move(pts);
    return j.dump();
}

void save_strokes(const std::filesystem::path &path, std::span<const StrokeSeq> seqs) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (const StrokeSeq &s : seqs) out << stroke_to_json_line(s) << '\n';
}

NormStats compute_norm_stats(std::span<const StrokeSeq> train) {
    if (train.empty()) throw std::invalid_argument("compute_norm_stats: no training data");
    double sx = 0, sy = 0;
    std::size_t n = 0;
    for (const StrokeSeq &s : train)
        for (const StrokePoint &p : s.points) {
            sx += p.dx;
            sy += p.dy;
            ++n;
        }
    if (n == 0) throw std::invalid_argument("compute_norm_stats: no points");
    NormStats st;
    st.mean_x = sx / static_cast<double>(n);
    st.mean_y = sy / static_cast<double>(n);
    double vx = 0, vy = 0;
    for (const StrokeSeq &s : train)
        for (const StrokePoint &p : s.points) {
            vx += (p.dx - st.mean_x) * (p.dx - st.mean_x);
            vy += (p.dy - st.mean_y) * (p.dy - st.mean_y);
        }
    st.std_x = std::max(std::sqrt(vx / static_cast<double>(n)), kMinStd);
    st.std_y = std::max(std::sqrt(vy / static_cast<double>(n)), kMinStd);
    return st;
}

std::vector<StrokeSeq> apply_norm(std::span<const StrokeSeq> seqs, const NormStats &stats) {
    std::vector<StrokeSeq> out(seqs.begin(), seqs.end());
    for (StrokeSeq &s : out)
        for (StrokePoint &p : s.points) p = stats.normalize(p);
    return out;
}

std::vector<StrokeSeq> remove_norm(std::span<const StrokeSeq> seqs, const NormStats &stats) {
    std::vector<StrokeSeq> out(seqs.begin(), seqs.end());
    for (StrokeSeq &s : out)
        for (StrokePoint &p : s.points) p = stats.denormalize(p);
    return out;
}

NormalizedData normalize_offsets(std::span<const StrokeSeq> train, std::span<const StrokeSeq> valid) {
    NormalizedData d;
    d.stats = compute_norm_stats(train);
    d.train = apply_norm(train, d.stats);
    d.valid = apply_norm(valid, d.stats);
    return d;
}

std::vector<std::size_t> load_manifest(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<std::size_t> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            std::size_t pos = 0;
            const unsigned long long v = std::stoull(line, &pos);
            out.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception &) {
            throw std::runtime_error(path.string() + " line " + std::to_string(line_no) +
                                     ": expected a line index");
        }
    }
    return out;
}

std::vector<StrokeSeq> select_lines(std::span<const StrokeSeq> seqs,
                                    std::span<const std::size_t> indices) {
    std::vector<StrokeSeq> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) {
        if (i >= seqs.size())
            throw std::out_of_range("manifest index " + std::to_string(i) + " beyond " +
                                    std::to_string(seqs.size()) + " sequences");
        out.push_back(seqs[i]);
    }
    return out;
}

// ─── Transcripts ────────────────────────────────────────────────────────────

int Alphabet::index_of(std::string_view ch) const {
    for (std::size_t i = 0; i < symbols.size(); ++i)
        if (static_cast<int>(i) != non_letter && symbols[i] == ch) return static_cast<int>(i);
    return non_letter;
}

Alphabet Alphabet::standard() {
    Alphabet a;
    for (char c = 'a'; c <= 'z'; ++c) a.symbols.emplace_back(1, c);
    for (char c = 'A'; c <= 'Z'; ++c) a.symbols.emplace_back(1, c);
    for (const char *s : {" ", ".", ",", "'"}) a.symbols.emplace_back(s);
    a.non_letter = static_cast<int>(a.symbols.size());
    a.symbols.emplace_back(kNonLetterLabel);
    return a;
}

Alphabet Alphabet::from_chars(std::string_view chars) {
    Alphabet a;
    for (std::string &c : utf8_chars(chars)) {
        if (std::find(a.symbols.begin(), a.symbols.end(), c) == a.symbols.end())
            a.symbols.push_back(std::move(c));
    }
    a.non_letter = static_cast<int>(a.symbols.size());
    a.symbols.emplace_back(kNonLetterLabel);
    return a;
}

CharSeq encode_transcript(std::string_view text, const Alphabet &alphabet) {
    if (alphabet.non_letter < 0 || alphabet.non_letter >= alphabet.size())
        throw std::invalid_argument("encode_transcript: alphabet lacks a non-letter label");
    CharSeq seq;
    seq.alphabet_size = alphabet.size();
    for (const std::string &c : utf8_chars(text)) seq.indices.push_back(alphabet.index_of(c));
    return seq;
}

std::string decode_transcript(const CharSeq &chars, const Alphabet &alphabet) {
    std::string out;
    for (int idx : chars.indices) out += alphabet.symbols.at(static_cast<std::size_t>(idx));
    return out;
}

// ─── Toy glyphs ─────────────────────────────────────────────────────────────

namespace {

double motif_distance(const std::vector<StrokePoint> &a, const std::vector<StrokePoint> &b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        d += (a[i].dx - b[i].dx) * (a[i].dx - b[i].dx) + (a[i].dy - b[i].dy) * (a[i].dy - b[i].dy);
    return std::sqrt(d);
}

} // namespace

ToyGlyphCorpus make_toy_glyph_corpus(const ToyGlyphOptions &opts) {
    if (opts.n_symbols < 2) throw std::invalid_argument("toy corpus needs at least 2 symbols");
    if (opts.n_symbols > 26) throw std::invalid_argument("toy corpus supports at most 26 symbols");
    if (opts.motif_len < 1) throw std::invalid_argument("toy corpus motif_len must be >= 1");
    if (opts.min_text_len < 1 || opts.max_text_len < opts.min_text_len)
        throw std::invalid_argument("toy corpus text length range is invalid");
    if (opts.noise_std < 0.0) throw std::invalid_argument("toy corpus noise_std must be >= 0");

    ToyGlyphCorpus corpus;
    std::string letters;
    for (int s = 0; s < opts.n_symbols; ++s) letters += static_cast<char>('a' + s);
    corpus.alphabet = Alphabet::from_chars(letters);

    Rng rng(opts.seed);
    const auto L = static_cast<std::size_t>(opts.motif_len);
    // Motifs must be well separated; relax the requirement if a seed is unlucky.
    double min_separation = 0.6 * std::sqrt(static_cast<double>(L));
    for (int s = 0; s < opts.n_symbols; ++s) {
        std::vector<StrokePoint> best;
        for (int attempt = 0;; ++attempt) {
            std::vector<StrokePoint> m(L);
            double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
            const double turn = rng.uniform(-0.8, 0.8);
            for (std::size_t i = 0; i < L; ++i) {
                angle += turn + 0.3 * rng.normal();
                const double len = rng.uniform(0.6, 1.4);
                m[i] = {len * std::cos(angle), len * std::sin(angle), i + 1 == L ? 1 : 0};
            }
            bool ok = true;
            for (const auto &other : corpus.motifs)
                if (motif_distance(m, other) < min_separation) ok = false;
            if (ok) {
                best = std::move(m);
                break;
            }
            if (attempt % 200 == 199) min_separation *= 0.9;
        }
        corpus.motifs.push_back(std::move(best));
    }

    corpus.sequences.reserve(static_cast<std::size_t>(opts.n_sequences));
    const auto span_len = static_cast<std::size_t>(opts.max_text_len - opts.min_text_len + 1);
    for (int n = 0; n < opts.n_sequences; ++n) {
        const std::size_t len = static_cast<std::size_t>(opts.min_text_len) + rng.uniform_index(span_len);
        StrokeSeq seq;
        for (std::size_t i = 0; i < corpus.lead_in; ++i) {
            StrokePoint q{0.0, 0.0, 0};
            if (opts.noise_std > 0.0) {
                q.dx = opts.noise_std * rng.normal();
                q.dy = opts.noise_std * rng.normal();
            }
            seq.points.push_back(q);
        }
        for (std::size_t u = 0; u < len; ++u) {
            const std::size_t sym = rng.uniform_index(static_cast<std::size_t>(opts.n_symbols));
            seq.text += letters[sym];
            for (const StrokePoint &p : corpus.motifs[sym]) {
                StrokePoint q = p;
                if (opts.noise_std > 0.0) {
                    q.dx += opts.noise_std * rng.normal();
                    q.dy += opts.noise_std * rng.normal();
                }
                seq.points.push_back(q);
            }
        }
        corpus.sequences.push_back(std::move(seq));
    }
    return corpus;
}

} // namespace scribe

#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scribe/mdn.hpp"
#include "scribe/softmax_head.hpp"
#include "scribe/window.hpp"

namespace scribe {

// ─── Text corpora ───────────────────────────────────────────────────────────

struct TextCorpus {
    Vocab vocab;
    std::vector<int> symbols;
};

// Tokenises `text` and builds a vocabulary ordered by descending frequency,
// ties broken by first appearance. Word mode splits on whitespace, keeps each
// newline as its own token, and maps everything beyond the `vocab_limit` most
// frequent words to an appended "<unk>" token (0 = no limit). Char mode
// decodes UTF-8 and throws std::runtime_error on malformed input.
TextCorpus build_text_corpus(std::string_view text, Granularity granularity, int vocab_limit = 0);
TextCorpus load_text_corpus(const std::filesystem::path &path, Granularity granularity,
                            int vocab_limit = 0);

// Encodes text with an existing vocabulary; out-of-vocabulary symbols map to
// the unknown token, or throw when the vocabulary has none.
std::vector<int> encode_text(std::string_view text, const Vocab &vocab);

// Consecutive chunks of `chunk_len` symbols; the last chunk may be shorter.
std::vector<std::vector<int>> chunk_symbols(std::span<const int> symbols, std::size_t chunk_len);

struct TextSplit {
    std::vector<int> train;
    std::vector<int> valid;
};

// The final `valid_fraction` of the stream becomes the validation split.
TextSplit split_tail(std::span<const int> symbols, double valid_fraction);

// ─── Pen strokes ────────────────────────────────────────────────────────────

struct StrokeSeq {
    std::vector<StrokePoint> points;
    std::string text;
};

struct StrokeLoadOptions {
    // Pen-down steps longer than this are treated as recording errors.
    double max_step = std::numeric_limits<double>::infinity();
};

// Parses one JSON line. Accepts either
//   {"text": "...", "strokes": [[dx, dy, eos], ...]}   (offsets), or
//   {"text": "...", "points":  [[x, y, eos], ...]}     (absolute; differenced).
// Throws std::runtime_error mentioning `line_no` when malformed.
StrokeSeq parse_stroke_line(std::string_view line, const StrokeLoadOptions &opts,
                            std::size_t line_no = 1);
std::vector<StrokeSeq> load_strokes(const std::filesystem::path &path,
                                    const StrokeLoadOptions &opts = {});

std::string stroke_to_json_line(const StrokeSeq &seq);
void save_strokes(const std::filesystem::path &path, std::span<const StrokeSeq> seqs);

// Replaces every pen-down step longer than `max_step` by moving the offending
// point to the midpoint of its neighbours (dropping it when it is the last
// point). Steps that follow a pen lift are never touched.
std::vector<StrokePoint> repair_long_steps(std::span<const StrokePoint> offsets, double max_step);

struct NormStats {
    double mean_x = 0.0, mean_y = 0.0;
    double std_x = 1.0, std_y = 1.0;

    StrokePoint normalize(const StrokePoint &p) const {
        return {(p.dx - mean_x) / std_x, (p.dy - mean_y) / std_y, p.eos};
    }
    StrokePoint denormalize(const StrokePoint &p) const {
        return {p.dx * std_x + mean_x, p.dy * std_y + mean_y, p.eos};
    }
    bool operator==(const NormStats &) const = default;
};

inline constexpr double kMinStd = 1e-6;

// Mean / std of the offsets over every point of `train`; std floored at kMinStd.
NormStats compute_norm_stats(std::span<const StrokeSeq> train);
std::vector<StrokeSeq> apply_norm(std::span<const StrokeSeq> seqs, const NormStats &stats);
std::vector<StrokeSeq> remove_norm(std::span<const StrokeSeq> seqs, const NormStats &stats);

struct NormalizedData {
    std::vector<StrokeSeq> train;
    std::vector<StrokeSeq> valid;
    NormStats stats;
};

// Stats from `train` only, applied to both splits.
NormalizedData normalize_offsets(std::span<const StrokeSeq> train,
                                 std::span<const StrokeSeq> valid = {});

// Split manifest: one zero-based line index per line.
std::vector<std::size_t> load_manifest(const std::filesystem::path &path);
std::vector<StrokeSeq> select_lines(std::span<const StrokeSeq> seqs,
                                    std::span<const std::size_t> indices);

// ─── Transcripts ────────────────────────────────────────────────────────────

// Character set for synthesis; characters outside it map to `non_letter`.
struct Alphabet {
    std::vector<std::string> symbols; // UTF-8 spelling of each character
    int non_letter = -1;

    int size() const { return static_cast<int>(symbols.size()); }
    int index_of(std::string_view ch) const;

    // 52 letters, space, three punctuation marks and the non-letter label.
    static Alphabet standard();
    // One entry per character of `chars` plus a trailing non-letter label.
    static Alphabet from_chars(std::string_view chars);
    bool operator==(const Alphabet &) const = default;
};

inline constexpr std::string_view kNonLetterLabel = "\xE2\x97\x8A"; // U+25CA

CharSeq encode_transcript(std::string_view text, const Alphabet &alphabet);
std::string decode_transcript(const CharSeq &chars, const Alphabet &alphabet);

// Splits UTF-8 text into code points (each returned as its UTF-8 bytes).
std::vector<std::string> utf8_chars(std::string_view text);

// ─── Toy glyph corpus ───────────────────────────────────────────────────────

struct ToyGlyphOptions {
    int n_symbols = 5;
    int motif_len = 10;
    int n_sequences = 2000;
    double noise_std = 0.05;
    std::uint64_t seed = 1;
    int min_text_len = 2;
    int max_text_len = 5;
};

struct ToyGlyphCorpus {
    Alphabet alphabet; // symbols 'a', 'b', ... plus the non-letter label
    std::vector<std::vector<StrokePoint>> motifs; // one per symbol, eos on the last point
    // Each sequence opens with this many pen-placement points (zero offset
    // plus noise), then the motifs of its transcript.
    std::size_t lead_in = 1;
    std::vector<StrokeSeq> sequences;
};

// Each symbol owns a fixed smooth stroke motif (deterministic in the seed);
// a sequence is the concatenation of its transcript's motifs plus Gaussian
// jitter on the offsets.
ToyGlyphCorpus make_toy_glyph_corpus(const ToyGlyphOptions &opts);

} // namespace scribe

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scribe/data_io.hpp"
#include "scribe/model.hpp"

namespace scribe {

// ─── Text ───────────────────────────────────────────────────────────────────

struct TextSampleConfig {
    std::size_t length = 0;   // symbols to generate
    std::uint64_t seed = 1;
    std::string prime;        // fed before generation; not part of the output
    bool greedy = false;      // argmax instead of sampling
};

// Generated symbol indices, starting from the null vector.
std::vector<int> sample_text_indices(const Model &model, const TextSampleConfig &cfg);
std::string sample_text(const Model &model, const TextSampleConfig &cfg);

// ─── Handwriting ────────────────────────────────────────────────────────────

inline constexpr std::size_t kDefaultHandwritingSteps = 700;

// Free-running samples from a prediction network, de-normalised.
StrokeSeq sample_handwriting(const Model &model, std::size_t steps, std::uint64_t seed,
                             double bias = 0.0);

enum class StopMode { Heuristic, FixedLength };

struct SampleConfig {
    std::size_t max_steps = 0; // 0 = 60 U + 300
    double bias = 0.0;
    std::uint64_t seed = 1;
    StopMode stop = StopMode::Heuristic;
};

struct SynthResult {
    StrokeSeq strokes;   // generated points only, de-normalised
    Mat phi;             // one row per network step, U + 1 columns
    std::size_t prime_steps = 0; // leading rows of `phi` spent on the prime
    bool stopped = false;   // the stop heuristic fired
    bool truncated = false; // max_steps reached first
};

std::size_t default_max_steps(std::size_t text_len);

SynthResult synth_sample(const Model &model, std::string_view text, const SampleConfig &cfg);

// Conditions on prime_text + synth_text, feeds the prime strokes (raw units)
// as clamped inputs and then samples freely.
SynthResult primed_sample(const Model &model, const StrokeSeq &prime_strokes,
                          std::string_view prime_text, std::string_view synth_text,
                          const SampleConfig &cfg);

// Dense matrix file: "rows cols" on the first line, then one row per line.
void save_matrix(const std::filesystem::path &path, const Mat &m);
Mat load_matrix(const std::filesystem::path &path);

} // namespace scribe

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "scribe/numkit.hpp"

namespace scribe {

enum class Granularity { Byte, Char, Word };

std::string_view granularity_name(Granularity g);
Granularity parse_granularity(std::string_view name);

// Ordered symbol table for text classes. Symbols are stored as their UTF-8
// (or raw byte) spelling; `unknown` is the index of the overflow bucket or -1.
struct Vocab {
    Granularity granularity = Granularity::Char;
    std::vector<std::string> symbols;
    int unknown = -1;

    int size() const { return static_cast<int>(symbols.size()); }
    // Index of a symbol; falls back to `unknown`, or -1 if there is none.
    int lookup(std::string_view symbol) const;
    // Joins symbols (words are separated by spaces, newlines stay newlines).
    std::string decode(std::span<const int> indices) const;
    // Must be called after `symbols` or `unknown` change; lookup() also
    // rebuilds lazily when the sizes disagree.
    void rebuild_index() const;

  private:
    mutable std::unordered_map<std::string, int> index_;
};

struct StepLoss {
    double loss = 0.0; // nats
    Vec dyhat;
};

// loss = -log softmax(yhat)[target];  dyhat = softmax(yhat) - onehot(target).
StepLoss text_step_loss(std::span<const double> yhat, int target);

// Sum of text_step_loss over rows of yhat. Writes the per-step derivatives
// into dyhat when it is non-null (resized to match).
double text_sequence_loss(const Mat &yhat, std::span<const int> targets, Mat *dyhat);

// Mean bits per symbol from a loss total in nats.
double bpc(double total_loss_nats, std::size_t n_symbols);

// 2^(avg_word_len * bpc).
double bpc_to_perplexity(double bpc, double avg_word_len);

// Percentage of steps whose argmax (lowest index on ties) misses the target.
double classification_error(const Mat &yhat, std::span<const int> targets);

} // namespace scribe

#include "scribe/softmax_head.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace scribe {

std::string_view granularity_name(Granularity g) {
    switch (g) {
    case Granularity::Byte:
        return "byte";
    case Granularity::Char:
        return "char";
    case Granularity::Word:
        return "word";
    }
    return "char";
}

Granularity parse_granularity(std::string_view name) {
    if (name == "byte") return Granularity::Byte;
    if (name == "char") return Granularity::Char;
    if (name == "word") return Granularity::Word;
    throw std::invalid_argument("unknown granularity: " + std::string(name));
}

void Vocab::rebuild_index() const {
    index_.clear();
    for (std::size_t i = 0; i < symbols.size(); ++i)
        if (static_cast<int>(i) != unknown) index_.emplace(symbols[i], static_cast<int>(i));
}

int Vocab::lookup(std::string_view symbol) const {
    if (index_.size() + (unknown >= 0 ? 1 : 0) != symbols.size())
        rebuild_index();
    auto it = index_.find(std::string(symbol));
    return it == index_.end() ? unknown : it->second;
}

std::string Vocab::decode(std::span<const int> indices) const {
    std::string out;
    bool need_space = false;
    for (int idx : indices) {
        const std::string &s = symbols.at(static_cast<std::size_t>(idx));
        if (granularity == Granularity::Word) {
            if (s == "\n") {
                out += '\n';
                need_space = false;
                continue;
            }
            if (need_space) out += ' ';
            need_space = true;
        }
        out += s;
    }
    return out;
}

StepLoss text_step_loss(std::span<const double> yhat, int target) {
    if (target < 0 || static_cast<std::size_t>(target) >= yhat.size())
        throw std::invalid_argument("text_step_loss: target " + std::to_string(target) +
                                    " outside " + std::to_string(yhat.size()) + " classes");
    StepLoss s;
    s.loss = logsumexp(yhat) - yhat[static_cast<std::size_t>(target)];
    s.dyhat = softmax_stable(yhat);
    s.dyhat[static_cast<std::size_t>(target)] -= 1.0;
    return s;
}

double text_sequence_loss(const Mat &yhat, std::span<const int> targets, Mat *dyhat) {
    if (yhat.rows() != targets.size())
        throw ShapeError("text_sequence_loss: " + std::to_string(yhat.rows()) +
                         " outputs for " + std::to_string(targets.size()) + " targets");
    if (dyhat) *dyhat = Mat(yhat.rows(), yhat.cols());
    double total = 0.0;
    for (std::size_t t = 0; t < targets.size(); ++t) {
        StepLoss s = text_step_loss(yhat.row(t), targets[t]);
        total += s.loss;
        if (dyhat) std::copy(s.dyhat.begin(), s.dyhat.end(), dyhat->row(t).begin());
    }
    return total;
}

double bpc(double total_loss_nats, std::size_t n_symbols) {
    if (n_symbols == 0) throw std::invalid_argument("bpc: no symbols");
    return total_loss_nats / (static_cast<double>(n_symbols) * std::numbers::ln2);
}

double bpc_to_perplexity(double bits, double avg_word_len) {
    if (bits < 0.0 || !(avg_word_len > 0.0))
        throw std::invalid_argument("bpc_to_perplexity: inputs must be positive");
    return std::exp2(avg_word_len * bits);
}

double classification_error(const Mat &yhat, std::span<const int> targets) {
    if (yhat.rows() != targets.size())
        throw ShapeError("classification_error: length mismatch");
    if (targets.empty()) return 0.0;
    std::size_t wrong = 0;
    for (std::size_t t = 0; t < targets.size(); ++t) {
        auto row = yhat.row(t);
        std::size_t best = 0;
        for (std::size_t k = 1; k < row.size(); ++k)
            if (row[k] > row[best]) best = k;
        if (static_cast<int>(best) != targets[t]) ++wrong;
    }
    return 100.0 * static_cast<double>(wrong) / static_cast<double>(targets.size());
}

} // namespace scribe

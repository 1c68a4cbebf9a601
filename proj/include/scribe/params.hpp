#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scribe/numkit.hpp"

namespace scribe {

// Shape of a stacked, skip-connected LSTM network. Every hidden layer sees the
// raw input; every hidden layer feeds the output. With a window, layer 0
// additionally emits the 3K window parameters and every layer reads the
// window vector (layer 0 with a one-step delay).
struct Architecture {
    int input_size = 0;
    std::vector<int> layer_widths;
    int output_size = 0;
    bool has_window = false;
    int window_components = 0; // K
    int alphabet_size = 0;     // size of the one-hot character vectors

    int num_layers() const { return static_cast<int>(layer_widths.size()); }
    // Throws std::invalid_argument when a size is out of range.
    void validate() const;
    bool operator==(const Architecture &) const = default;
};

// LSTM gate blocks, in the order their rows are stored.
enum class Gate : int { Input = 0, Forget = 1, Cell = 2, Output = 3 };

struct ViewInfo {
    std::string name;
    std::size_t offset = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
};

// Offsets of one layer's blocks inside the flat vector. Gate matrices are
// stacked [i; f; c; o] along rows, so every gate block is contiguous.
struct LayerLayout {
    int width = 0;
    int below_width = 0; // 0 for the first layer
    ViewInfo w_input;    // 4H x input_size
    ViewInfo w_below;    // 4H x H_{n-1}
    ViewInfo w_recurrent;// 4H x H
    ViewInfo w_window;   // 4H x alphabet (0 columns without a window)
    ViewInfo bias;       // 4H
    ViewInfo peep_input; // H, diagonal cell->gate weights
    ViewInfo peep_forget;
    ViewInfo peep_output;
    ViewInfo w_output;   // output_size x H
};

struct ParamLayout {
    Architecture arch;
    std::vector<LayerLayout> layers;
    ViewInfo output_bias;
    ViewInfo window_weights; // 3K x H_0
    ViewInfo window_bias;    // 3K
    std::vector<ViewInfo> views; // every named block, in storage order
    std::size_t total = 0;

    explicit ParamLayout(const Architecture &arch);
    const ViewInfo &find(std::string_view name) const;
};

// Closed-form parameter count for an architecture.
std::size_t parameter_count(const Architecture &arch);

// One flat vector of doubles plus named views aliasing it. Copies are deep;
// the layout is shared.
class ParamStore {
  public:
    ParamStore() = default;
    explicit ParamStore(const Architecture &arch);
    explicit ParamStore(std::shared_ptr<const ParamLayout> layout);

    const ParamLayout &layout() const { return *layout_; }
    std::shared_ptr<const ParamLayout> shared_layout() const { return layout_; }
    const Architecture &arch() const { return layout_->arch; }

    std::span<double> flat() { return data_; }
    std::span<const double> flat() const { return data_; }
    std::size_t size() const { return data_.size(); }

    MatView view(const ViewInfo &v) { return {data_.data() + v.offset, v.rows, v.cols}; }
    ConstMatView view(const ViewInfo &v) const {
        return {data_.data() + v.offset, v.rows, v.cols};
    }
    MatView view(std::string_view name) { return view(layout_->find(name)); }
    ConstMatView view(std::string_view name) const { return view(layout_->find(name)); }

    // Rows of one gate inside a 4H-row block of layer `layer`.
    MatView gate_view(const ViewInfo &block, int layer, Gate g);

    void set_zero();
    // Same layout, all zeros.
    ParamStore zeros_like() const { return ParamStore(layout_); }

    bool same_layout(const ParamStore &other) const;

  private:
    std::shared_ptr<const ParamLayout> layout_;
    std::vector<double> data_;
};

// Steps per character the soft window initially advances by.
inline constexpr double kInitialStepsPerChar = 20.0;

// Weights uniform in (-scale, scale); biases and peepholes start at zero,
// except the window's kappa_hat bias, which starts at -log(kInitialStepsPerChar).
ParamStore init_params(const Architecture &arch, std::uint64_t seed, double scale = 0.1);

} // namespace scribe

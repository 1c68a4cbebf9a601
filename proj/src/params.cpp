#include "scribe/params.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace scribe {

void Architecture::validate() const {
    if (input_size < 1) throw std::invalid_argument("architecture: input_size must be >= 1");
    if (layer_widths.empty())
        throw std::invalid_argument("architecture: at least one hidden layer is required");
    for (int w : layer_widths)
        if (w < 1) throw std::invalid_argument("architecture: layer widths must be >= 1");
    if (output_size < 1) throw std::invalid_argument("architecture: output_size must be >= 1");
    if (has_window) {
        if (window_components < 1)
            throw std::invalid_argument("architecture: window needs >= 1 component");
        if (alphabet_size < 1)
            throw std::invalid_argument("architecture: window needs alphabet_size >= 1");
    }
}

ParamLayout::ParamLayout(const Architecture &a) : arch(a) {
    arch.validate();
    std::size_t offset = 0;
    auto add = [&](std::string name, std::size_t rows, std::size_t cols) {
        ViewInfo v{std::move(name), offset, rows, cols};
        offset += rows * cols;
        views.push_back(v);
        return v;
    };
    const std::size_t alphabet = arch.has_window ? static_cast<std::size_t>(arch.alphabet_size) : 0;
    for (int n = 0; n < arch.num_layers(); ++n) {
        const std::string p = "layer" + std::to_string(n) + ".";
        const auto H = static_cast<std::size_t>(arch.layer_widths[n]);
        const std::size_t below = n == 0 ? 0 : static_cast<std::size_t>(arch.layer_widths[n - 1]);
        LayerLayout L;
        L.width = static_cast<int>(H);
        L.below_width = static_cast<int>(below);
        L.w_input = add(p + "W_x", 4 * H, static_cast<std::size_t>(arch.input_size));
        L.w_below = add(p + "W_below", 4 * H, below);
        L.w_recurrent = add(p + "W_h", 4 * H, H);
        L.w_window = add(p + "W_w", 4 * H, alphabet);
        L.bias = add(p + "b", 4 * H, 1);
        L.peep_input = add(p + "peep_i", H, 1);
        L.peep_forget = add(p + "peep_f", H, 1);
        L.peep_output = add(p + "peep_o", H, 1);
        layers.push_back(L);
    }
    for (int n = 0; n < arch.num_layers(); ++n)
        layers[n].w_output = add("out.W" + std::to_string(n),
                                 static_cast<std::size_t>(arch.output_size),
                                 static_cast<std::size_t>(arch.layer_widths[n]));
    output_bias = add("out.b", static_cast<std::size_t>(arch.output_size), 1);
    if (arch.has_window) {
        const auto K3 = static_cast<std::size_t>(3 * arch.window_components);
        window_weights = add("window.W", K3, static_cast<std::size_t>(arch.layer_widths[0]));
        window_bias = add("window.b", K3, 1);
    }
    total = offset;
}

const ViewInfo &ParamLayout::find(std::string_view name) const {
    auto it = std::find_if(views.begin(), views.end(),
                           [&](const ViewInfo &v) { return v.name == name; });
    if (it == views.end())
        throw std::invalid_argument("no parameter view named " + std::string(name));
    return *it;
}

std::size_t parameter_count(const Architecture &arch) {
    std::size_t total = 0;
    const std::size_t I = static_cast<std::size_t>(arch.input_size);
    const std::size_t A = arch.has_window ? static_cast<std::size_t>(arch.alphabet_size) : 0;
    const std::size_t O = static_cast<std::size_t>(arch.output_size);
    std::size_t prev = 0;
    for (int w : arch.layer_widths) {
        const auto H = static_cast<std::size_t>(w);
        total += 4 * H * (I + prev + H + A + 1) + 3 * H + O * H;
        prev = H;
    }
    total += O;
    if (arch.has_window)
        total += 3 * static_cast<std::size_t>(arch.window_components) *
                 (static_cast<std::size_t>(arch.layer_widths[0]) + 1);
    return total;
}

ParamStore::ParamStore(const Architecture &arch)
    : ParamStore(std::make_shared<const ParamLayout>(arch)) {}

ParamStore::ParamStore(std::shared_ptr<const ParamLayout> layout)
    : layout_(std::move(layout)), data_(layout_->total, 0.0) {}

MatView ParamStore::gate_view(const ViewInfo &block, int layer, Gate g) {
    const auto H = static_cast<std::size_t>(layout_->layers.at(layer).width);
    return view(block).row_block(static_cast<std::size_t>(g) * H, H);
}

void ParamStore::set_zero() { std::fill(data_.begin(), data_.end(), 0.0); }

bool ParamStore::same_layout(const ParamStore &other) const {
    if (layout_ == other.layout_) return true;
    return layout_ && other.layout_ && layout_->arch == other.layout_->arch;
}

ParamStore init_params(const Architecture &arch, std::uint64_t seed, double scale) {
    if (!(scale > 0.0)) throw std::invalid_argument("init_params: scale must be > 0");
    ParamStore store(arch);
    Rng rng(seed);
    const ParamLayout &L = store.layout();
    for (const ViewInfo &v : L.views) {
        const bool zero_init = v.name.ends_with(".b") || v.name.find("peep_") != std::string::npos;
        if (zero_init) continue;
        for (double &w : store.view(v).flat()) w = rng.uniform(-scale, scale);
    }
    if (arch.has_window) {
        // Start the window at about one character per kInitialStepsPerChar
        // steps; at exp(0) = 1 it runs off the text before it can align.
        const auto K = static_cast<std::size_t>(arch.window_components);
        auto b = store.view(L.window_bias).flat();
        for (std::size_t k = 0; k < K; ++k) b[2 * K + k] = -std::log(kInitialStepsPerChar);
    }
    return store;
}

} // namespace scribe

#pragma once

#include <string>

#include "scribe/data_io.hpp"
#include "scribe/model.hpp"

namespace scribe {

enum class ColorRamp { Heat, Gray };

struct RenderSpec {
    int width = 800;
    int height = 300;
    double margin = 10.0;
    double stroke_width = 1.5;
    int grid = 160; // heatmap cells along the wider axis
    ColorRamp ramp = ColorRamp::Heat;

    // Throws std::invalid_argument on non-positive sizes.
    void validate() const;
};

// Offsets are summed into absolute positions (the origin itself is not
// drawn); every eos = 1 ends the current polyline. y points up in the data
// and is flipped for the screen.
std::string render_strokes_svg(const StrokeSeq &seq, const RenderSpec &spec);

// Predictive density of the next pen position accumulated over a sequence,
// in raw (de-normalised) units. values(r, c) is the density summed over
// timesteps at the centre (x0 + (c + 0.5) cell, y0 + (r + 0.5) cell).
struct DensityGrid {
    double x0 = 0.0, y0 = 0.0, cell = 1.0;
    Mat values; // rows = y cells, cols = x cells
};

// Runs the mixture model over `seq` (raw units; its transcript conditions a
// synthesis model) and rasterises each step's density around the current
// pen position.
DensityGrid density_grid(const Model &model, const StrokeSeq &seq, const RenderSpec &spec);
std::string render_density_heatmap(const Model &model, const StrokeSeq &seq,
                                   const RenderSpec &spec);
std::string render_density_grid(const DensityGrid &grid, const RenderSpec &spec);

// phi(t, u) with t along x and u down the y axis; intensity proportional to phi.
std::string render_window_heatmap(const Mat &phi, const RenderSpec &spec);

} // namespace scribe

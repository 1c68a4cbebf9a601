#include "scribe/viz.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "scribe/mdn.hpp"
#include "scribe/network.hpp"

namespace scribe {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

std::string svg_open(const RenderSpec &s) {
    std::ostringstream o;
    o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << s.width
      << "\" height=\"" << s.height << "\" viewBox=\"0 0 " << s.width << ' ' << s.height
      << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << s.width << "\" height=\"" << s.height
      << "\" fill=\"" << (s.ramp == ColorRamp::Heat ? "black" : "white") << "\"/>\n";
    return o.str();
}

std::string color(double level, ColorRamp ramp) {
    level = std::clamp(level, 0.0, 1.0);
    int r, g, b;
    if (ramp == ColorRamp::Gray) {
        r = g = b = static_cast<int>(std::lround(255.0 * (1.0 - level)));
    } else {
        // black -> red -> yellow -> white
        const double x = 3.0 * level;
        r = static_cast<int>(std::lround(255.0 * std::min(1.0, x)));
        g = static_cast<int>(std::lround(255.0 * std::clamp(x - 1.0, 0.0, 1.0)));
        b = static_cast<int>(std::lround(255.0 * std::clamp(x - 2.0, 0.0, 1.0)));
    }
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return buf;
}

struct Frame {
    double min_x, min_y, scale, off_x, off_y;
    int height;
    double sx(double x) const { return off_x + (x - min_x) * scale; }
    double sy(double y) const { return height - (off_y + (y - min_y) * scale); }
};

// Fits the box [x0, x1] x [y0, y1] into the canvas, preserving aspect.
Frame fit(double x0, double x1, double y0, double y1, const RenderSpec &s) {
    const double w = std::max(x1 - x0, 1e-9), h = std::max(y1 - y0, 1e-9);
    const double avail_w = s.width - 2.0 * s.margin, avail_h = s.height - 2.0 * s.margin;
    const double scale = std::min(avail_w / w, avail_h / h);
    Frame f{x0, y0, scale, 0.0, 0.0, s.height};
    f.off_x = s.margin + 0.5 * (avail_w - (x1 - x0) * scale);
    f.off_y = s.margin + 0.5 * (avail_h - (y1 - y0) * scale);
    return f;
}

std::vector<Point2> absolute(const StrokeSeq &seq) {
    std::vector<Point2> pts;
    double x = 0.0, y = 0.0;
    for (const StrokePoint &p : seq.points) {
        x += p.dx;
        y += p.dy;
        pts.push_back({x, y});
    }
    return pts;
}

} // namespace

void RenderSpec::validate() const {
    if (width <= 0 || height <= 0 || grid <= 0 || stroke_width <= 0.0 || margin < 0.0 ||
        2.0 * margin >= std::min(width, height))
        throw std::invalid_argument("render spec needs positive dimensions");
}

std::string render_strokes_svg(const StrokeSeq &seq, const RenderSpec &spec) {
    spec.validate();
    const std::vector<Point2> pts = absolute(seq);
    for (const Point2 &p : pts)
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw std::invalid_argument("render_strokes_svg: non-finite coordinate");
    std::string out = svg_open(spec);
    if (pts.empty()) return out + "</svg>\n";
    double x0 = pts[0].x, x1 = x0, y0 = pts[0].y, y1 = y0;
    for (const Point2 &p : pts) {
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
    }
    const Frame f = fit(x0, x1, y0, y1, spec);
    const std::string ink = spec.ramp == ColorRamp::Heat ? "white" : "black";
    std::string line;
    auto flush = [&] {
        if (line.empty()) return;
        out += "<polyline fill=\"none\" stroke=\"" + ink + "\" stroke-width=\"" +
               fmt(spec.stroke_width) +
               "\" stroke-linecap=\"round\" stroke-linejoin=\"round\" points=\"" + line +
               "\"/>\n";
        line.clear();
    };
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (!line.empty()) line += ' ';
        line += fmt(f.sx(pts[i].x)) + "," + fmt(f.sy(pts[i].y));
        if (seq.points[i].eos == 1) flush();
    }
    flush();
    return out + "</svg>\n";
}

DensityGrid density_grid(const Model &model, const StrokeSeq &seq, const RenderSpec &spec) {
    spec.validate();
    if (model.head != HeadKind::Mixture)
        throw std::invalid_argument("density heatmaps need a mixture-head model");
    DensityGrid g;
    const std::vector<Point2> pts = absolute(seq);
    double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
    for (const Point2 &p : pts) {
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
    }
    const double pad = 0.05 * std::max({x1 - x0, y1 - y0, 1e-6});
    x0 -= pad;
    x1 += pad;
    y0 -= pad;
    y1 += pad;
    // Cells are square; the wider axis gets spec.grid of them.
    const double aspect_w = x1 - x0, aspect_h = y1 - y0;
    g.cell = std::max(aspect_w, aspect_h) / spec.grid;
    const auto nx = static_cast<std::size_t>(std::max(1.0, std::ceil(aspect_w / g.cell)));
    const auto ny = static_cast<std::size_t>(std::max(1.0, std::ceil(aspect_h / g.cell)));
    g.x0 = x0;
    g.y0 = y0;
    g.values = Mat(ny, nx);
    if (seq.points.empty()) return g;

    const NormStats norm = model.norm.value_or(NormStats{});
    const double jac = 1.0 / (norm.std_x * norm.std_y);
    std::optional<CharSeq> chars;
    if (model.is_synthesis()) chars = encode_transcript(seq.text, *model.alphabet);
    NetworkState state = initial_state(model.arch());
    StepCache cache;
    Vec x(3, 0.0), yhat(static_cast<std::size_t>(model.arch().output_size));
    Point2 pen{0.0, 0.0};
    for (std::size_t t = 0; t < seq.points.size(); ++t) {
        network_step(model.params, x, chars ? &*chars : nullptr, state, cache, yhat, t);
        const MixtureOut mix = split_outputs(yhat, model.mixture_components);
        for (std::size_t r = 0; r < ny; ++r) {
            const double cy = g.y0 + (static_cast<double>(r) + 0.5) * g.cell;
            for (std::size_t c = 0; c < nx; ++c) {
                const double cx = g.x0 + (static_cast<double>(c) + 0.5) * g.cell;
                const StrokePoint off = norm.normalize({cx - pen.x, cy - pen.y, 0});
                g.values(r, c) += jac * mixture_density(mix, {off.dx, off.dy});
            }
        }
        write_stroke_input(norm.normalize(seq.points[t]), x);
        pen = pts[t];
    }
    return g;
}

std::string render_density_grid(const DensityGrid &g, const RenderSpec &spec) {
    spec.validate();
    std::string out = svg_open(spec);
    const Mat &v = g.values;
    double vmax = 0.0;
    for (double d : v.values()) vmax = std::max(vmax, d);
    if (v.size() == 0 || !(vmax > 0.0) || !std::isfinite(vmax)) return out + "</svg>\n";
    const double w = g.cell * static_cast<double>(v.cols());
    const double h = g.cell * static_cast<double>(v.rows());
    const Frame f = fit(g.x0, g.x0 + w, g.y0, g.y0 + h, spec);
    const double floor = vmax * 1e-6;
    const double span = std::log(vmax) - std::log(floor);
    const double side = g.cell * f.scale;
    for (std::size_t r = 0; r < v.rows(); ++r)
        for (std::size_t c = 0; c < v.cols(); ++c) {
            const double d = v(r, c);
            if (d <= floor) continue;
            const double level = (std::log(d) - std::log(floor)) / span;
            const double px = f.sx(g.x0 + static_cast<double>(c) * g.cell);
            const double py = f.sy(g.y0 + static_cast<double>(r + 1) * g.cell);
            out += "<rect x=\"" + fmt(px) + "\" y=\"" + fmt(py) + "\" width=\"" + fmt(side) +
                   "\" height=\"" + fmt(side) + "\" fill=\"" + color(level, spec.ramp) +
                   "\"/>\n";
        }
    return out + "</svg>\n";
}

std::string render_density_heatmap(const Model &model, const StrokeSeq &seq,
                                   const RenderSpec &spec) {
    return render_density_grid(density_grid(model, seq, spec), spec);
}

std::string render_window_heatmap(const Mat &phi, const RenderSpec &spec) {
    spec.validate();
    std::string out = svg_open(spec);
    double vmax = 0.0;
    for (double d : phi.values()) {
        if (!std::isfinite(d)) throw std::invalid_argument("window heatmap: non-finite phi");
        vmax = std::max(vmax, d);
    }
    if (phi.size() == 0 || vmax <= 0.0) return out + "</svg>\n";
    const double avail_w = spec.width - 2.0 * spec.margin;
    const double avail_h = spec.height - 2.0 * spec.margin;
    const double cw = avail_w / static_cast<double>(phi.rows());
    const double ch = avail_h / static_cast<double>(phi.cols());
    for (std::size_t t = 0; t < phi.rows(); ++t)
        for (std::size_t u = 0; u < phi.cols(); ++u) {
            const double d = phi(t, u);
            if (d <= 0.0) continue;
            out += "<rect x=\"" + fmt(spec.margin + static_cast<double>(t) * cw) + "\" y=\"" +
                   fmt(spec.margin + static_cast<double>(u) * ch) + "\" width=\"" + fmt(cw) +
                   "\" height=\"" + fmt(ch) + "\" fill=\"" + color(d / vmax, spec.ramp) +
                   "\"/>\n";
        }
    return out + "</svg>\n";
}

} // namespace scribe

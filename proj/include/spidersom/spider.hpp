#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iostream>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "numfmt.hpp"
#include "rng.hpp"
#include "strength.hpp"

namespace spidersom {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point p) { return std::hypot(p.x, p.y); }

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;

    friend bool operator==(const Rgb&, const Rgb&) = default;

    std::string hex() const {
        static constexpr char digits[] = "0123456789abcdef";
        std::string s = "#";
        for (std::uint8_t c : {r, g, b}) {
            s += digits[c >> 4];
            s += digits[c & 0xF];
        }
        return s;
    }
};

/// Rendering knobs: segment threshold, thread budget, grid, palette, canvas.
struct PlotStyle {
    double threshold = 0.5;
    std::size_t max_threads = 8;
    std::size_t ring_count = 4;
    Rgb low{230, 230, 230};
    Rgb high{180, 30, 30};
    std::array<double, 3> band_cuts{0.25, 0.5, 0.75};
    std::array<Rgb, 4> band_colors{Rgb{150, 150, 150}, Rgb{70, 130, 180}, Rgb{255, 140, 0}, Rgb{178, 34, 34}};
    double canvas = 800.0;
    std::uint64_t jitter_seed = 0;

    void validate() const {
        if (!(threshold >= 0.0 && threshold <= 1.0)) throw std::invalid_argument("threshold must lie in [0,1]");
        if (max_threads < 1) throw std::invalid_argument("max_threads must be at least 1");
        if (ring_count < 1) throw std::invalid_argument("ring_count must be at least 1");
        if (!(canvas >= 100.0)) throw std::invalid_argument("canvas must be at least 100px");
        if (!std::is_sorted(band_cuts.begin(), band_cuts.end()))
            throw std::invalid_argument("threshold band cuts must be ascending");
    }
};

/// Concentric rings (ring k scaled by k/m) and centre-to-vertex spokes.
struct GridLines {
    std::vector<std::vector<Point>> rings;
    std::vector<std::array<Point, 2>> spokes;
};

/**
 * @brief Polygon frame of the spider plot.
 *
 * Vertex k sits at angle pi/2 - 2*pi*k/n, so vertex 0 is at the top and the
 * rest follow clockwise.
 */
struct SpiderLayout {
    std::size_t n = 0;
    double radius = 1.0;
    std::vector<Point> vertices;
    GridLines grid;
    std::vector<Point> label_anchors;

    double inradius() const { return radius * std::cos(std::numbers::pi / static_cast<double>(n)); }
};

inline double vertex_angle(std::size_t k, std::size_t n) {
    return std::numbers::pi / 2.0 - 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
}

inline GridLines grid_lines(const SpiderLayout& layout, std::size_t m) {
    if (m < 1) throw std::invalid_argument("grid_lines: need at least one ring");
    GridLines g;
    for (std::size_t k = 1; k <= m; ++k) {
        const double scale = static_cast<double>(k) / static_cast<double>(m);
        std::vector<Point> ring;
        ring.reserve(layout.n);
        for (const auto& v : layout.vertices) ring.push_back(scale * v);
        g.rings.push_back(std::move(ring));
    }
    for (const auto& v : layout.vertices) g.spokes.push_back({Point{0.0, 0.0}, v});
    return g;
}

/// Labels sit radially outside the polygon at this multiple of the radius.
inline constexpr double label_offset = 1.08;

inline SpiderLayout polygon_layout(std::size_t n, double radius, const PlotStyle& style) {
    if (n < 3) throw std::invalid_argument("polygon_layout: need at least 3 variables, got " + std::to_string(n));
    if (!(radius > 0.0) || !std::isfinite(radius)) throw std::invalid_argument("polygon_layout: radius must be positive");
    SpiderLayout layout;
    layout.n = n;
    layout.radius = radius;
    for (std::size_t k = 0; k < n; ++k) {
        const double a = vertex_angle(k, n);
        layout.vertices.push_back({radius * std::cos(a), radius * std::sin(a)});
        layout.label_anchors.push_back({label_offset * radius * std::cos(a), label_offset * radius * std::sin(a)});
    }
    layout.grid = grid_lines(layout, style.ring_count);
    return layout;
}

/// Channel-wise interpolation between the low and high anchors; out-of-range values clamp with a warning.
inline Rgb colormap(double value, const PlotStyle& style) {
    if (!(value >= 0.0 && value <= 1.0)) {
        std::clog << "warning: colormap value " << value << " outside [0,1], clamped\n";
        value = std::isnan(value) ? 0.0 : std::clamp(value, 0.0, 1.0);
    }
    auto mix = [value](std::uint8_t lo, std::uint8_t hi) {
        return static_cast<std::uint8_t>(std::lround(lo + value * (static_cast<double>(hi) - lo)));
    };
    return {mix(style.low.r, style.high.r), mix(style.low.g, style.high.g), mix(style.low.b, style.high.b)};
}

/// Which threshold band a strength falls in: 0 below the first cut, 3 at or above the last.
inline std::size_t threshold_band(double value, const PlotStyle& style) {
    return static_cast<std::size_t>(std::upper_bound(style.band_cuts.begin(), style.band_cuts.end(), value) -
                                    style.band_cuts.begin());
}

struct Segment {
    std::size_t a = 0;
    std::size_t b = 0;
    double strength = 0.0;
    Rgb fill;
    std::array<Point, 4> outline;
};

struct QuadCurve {
    Point start, control, end;

    Point at(double t) const {
        const double u = 1.0 - t;
        return (u * u) * start + (2.0 * u * t) * control + (t * t) * end;
    }
};

struct Thread {
    std::size_t from = 0;
    std::size_t to = 0;
    std::size_t count = 0;
    std::vector<QuadCurve> curves;
    Rgb color;
};

namespace detail {

inline void check_size(const SpiderLayout& layout, const StrengthMatrix& sm, const char* what) {
    if (sm.size() != layout.n)
        throw data_error(std::string(what) + ": strength matrix has " + std::to_string(sm.size()) +
                         " variables, layout has " + std::to_string(layout.n));
}

// Distance from p along unit direction d to the polygon boundary (p inside).
inline double distance_to_boundary(const SpiderLayout& layout, Point p, Point d) {
    const double ri = layout.inradius();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < layout.n; ++k) {
        const double a = vertex_angle(k, layout.n) - std::numbers::pi / static_cast<double>(layout.n);
        const Point edge_normal{std::cos(a), std::sin(a)};
        const double rate = dot(edge_normal, d);
        if (rate <= 0.0) continue;
        best = std::min(best, (ri - dot(edge_normal, p)) / rate);
    }
    return std::max(0.0, best);
}

inline Point unit_normal(Point from, Point to) {
    const Point d = to - from;
    const double len = norm(d);
    return {-d.y / len, d.x / len};
}

}  // namespace detail

/**
 * One band per unordered pair whose symmetric strength exceeds the
 * threshold. The band is a diamond spanning the chord between the two
 * vertices; its half-width is strength * inradius / 4, cut back where it
 * would cross the polygon edge.
 */
inline std::vector<Segment> build_segments(const SpiderLayout& layout, const StrengthMatrix& sm,
                                           const PlotStyle& style) {
    detail::check_size(layout, sm, "build_segments");
    std::vector<Segment> out;
    const double max_half = layout.inradius() / 4.0;
    for (std::size_t a = 0; a < layout.n; ++a)
        for (std::size_t b = a + 1; b < layout.n; ++b) {
            const double s = sm.symmetric(a, b);
            if (!(s > style.threshold)) continue;
            const Point va = layout.vertices[a];
            const Point vb = layout.vertices[b];
            const Point mid = 0.5 * (va + vb);
            const Point nrm = detail::unit_normal(va, vb);
            const double half = s * max_half;
            const double left = std::min(half, detail::distance_to_boundary(layout, mid, nrm));
            const double right = std::min(half, detail::distance_to_boundary(layout, mid, -1.0 * nrm));
            Segment seg;
            seg.a = a;
            seg.b = b;
            seg.strength = s;
            seg.fill = colormap(0.5 * (sm.frequency(a) + sm.frequency(b)), style);
            seg.outline = {va, mid + left * nrm, vb, mid - right * nrm};
            out.push_back(seg);
        }
    return out;
}

/// round(conditional * max_threads), halves away from zero.
inline std::size_t thread_count(double conditional, std::size_t max_threads) {
    return static_cast<std::size_t>(std::llround(conditional * static_cast<double>(max_threads)));
}

/**
 * Threads for every ordered pair a != b. Each curve bends off the chord
 * midpoint by a seeded offset in [-chord/4, chord/4]; an outward bend is
 * capped at 2r(1 - cos phi) so the curve never leaves the bounding circle.
 */
inline std::vector<Thread> build_threads(const SpiderLayout& layout, const StrengthMatrix& sm,
                                         const PlotStyle& style) {
    detail::check_size(layout, sm, "build_threads");
    Rng rng(style.jitter_seed);
    std::vector<Thread> out;
    for (std::size_t a = 0; a < layout.n; ++a)
        for (std::size_t b = 0; b < layout.n; ++b) {
            if (a == b) continue;
            const double p = sm.conditional(a, b);
            Thread th;
            th.from = a;
            th.to = b;
            th.count = thread_count(p, style.max_threads);
            th.color = style.band_colors[threshold_band(p, style)];
            if (th.count == 0) {
                out.push_back(std::move(th));
                continue;
            }
            const Point va = layout.vertices[a];
            const Point vb = layout.vertices[b];
            const Point mid = 0.5 * (va + vb);
            const double chord = norm(vb - va);
            Point outward = detail::unit_normal(va, vb);
            if (dot(outward, mid) < 0.0) outward = -1.0 * outward;
            const double cos_half = std::min(1.0, norm(mid) / layout.radius);
            const double max_out = 2.0 * layout.radius * (1.0 - cos_half);
            for (std::size_t i = 0; i < th.count; ++i) {
                const double offset = std::min(rng.uniform(-chord / 4.0, chord / 4.0), max_out);
                th.curves.push_back({va, mid + offset * outward, vb});
            }
            out.push_back(std::move(th));
        }
    return out;
}

namespace detail {

inline std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

class SvgCanvas {
public:
    SvgCanvas(double canvas, double radius)
        : centre_(canvas / 2.0), scale_(canvas / 2.0 / (1.25 * radius)) {}

    std::string x(double v) const { return numfmt::fixed(centre_ + scale_ * v, 4); }
    std::string y(double v) const { return numfmt::fixed(centre_ - scale_ * v, 4); }
    std::string pt(Point p) const { return x(p.x) + "," + y(p.y); }

    std::string points(const auto& pts) const {
        std::string s;
        for (const auto& p : pts) {
            if (!s.empty()) s += ' ';
            s += pt(p);
        }
        return s;
    }

private:
    double centre_;
    double scale_;
};

}  // namespace detail

/**
 * @brief Standalone SVG 1.1 document.
 *
 * Layers in fixed order: grid rings, segments, threads, spokes, labels.
 * Every numeric attribute carries exactly four decimals.
 */
inline std::string render_svg(const SpiderLayout& layout, const std::vector<Segment>& segments,
                              const std::vector<Thread>& threads, const PlotStyle& style,
                              const std::vector<std::string>& labels) {
    if (labels.size() != layout.n)
        throw data_error("render_svg: " + std::to_string(labels.size()) + " labels for " + std::to_string(layout.n) +
                         " vertices");
    for (const auto& s : segments)
        if (s.a >= layout.n || s.b >= layout.n) throw data_error("render_svg: segment references a missing vertex");
    for (const auto& t : threads)
        if (t.from >= layout.n || t.to >= layout.n) throw data_error("render_svg: thread references a missing vertex");

    const detail::SvgCanvas cv(style.canvas, layout.radius);
    const auto f4 = [](double v) { return numfmt::fixed(v, 4); };
    const std::string size = f4(style.canvas);
    const double font = style.canvas / 50.0;

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + size + "\" height=\"" + size +
           "\" viewBox=\"0.0000 0.0000 " + size + " " + size + "\">\n";

    out += "<g id=\"grid\" fill=\"none\" stroke=\"#c8c8c8\" stroke-width=\"" + f4(1.0) + "\">\n";
    for (const auto& ring : layout.grid.rings) out += "<polygon points=\"" + cv.points(ring) + "\"/>\n";
    out += "</g>\n";

    out += "<g id=\"segments\" stroke=\"none\" fill-opacity=\"" + f4(0.6) + "\">\n";
    for (const auto& s : segments)
        out += "<polygon points=\"" + cv.points(s.outline) + "\" fill=\"" + s.fill.hex() + "\"/>\n";
    out += "</g>\n";

    out += "<g id=\"threads\" fill=\"none\" stroke-width=\"" + f4(0.8) + "\" stroke-opacity=\"" + f4(0.8) + "\">\n";
    for (const auto& t : threads)
        for (const auto& c : t.curves)
            out += "<path d=\"M " + cv.x(c.start.x) + " " + cv.y(c.start.y) + " Q " + cv.x(c.control.x) + " " +
                   cv.y(c.control.y) + " " + cv.x(c.end.x) + " " + cv.y(c.end.y) + "\" stroke=\"" + t.color.hex() +
                   "\"/>\n";
    out += "</g>\n";

    out += "<g id=\"spokes\" stroke=\"#969696\" stroke-width=\"" + f4(1.0) + "\">\n";
    for (const auto& s : layout.grid.spokes)
        out += "<line x1=\"" + cv.x(s[0].x) + "\" y1=\"" + cv.y(s[0].y) + "\" x2=\"" + cv.x(s[1].x) + "\" y2=\"" +
               cv.y(s[1].y) + "\"/>\n";
    out += "</g>\n";

    out += "<g id=\"labels\" font-family=\"sans-serif\" font-size=\"" + f4(font) + "\" fill=\"#222222\">\n";
    for (std::size_t k = 0; k < layout.n; ++k) {
        const Point p = layout.label_anchors[k];
        const double tol = 1e-9 * layout.radius;
        const char* anchor = p.x > tol ? "start" : (p.x < -tol ? "end" : "middle");
        out += "<text x=\"" + cv.x(p.x) + "\" y=\"" + cv.y(p.y) + "\" text-anchor=\"" + anchor +
               "\" dominant-baseline=\"middle\">" + detail::xml_escape(labels[k]) + "</text>\n";
    }
    out += "</g>\n";
    out += "</svg>\n";
    return out;
}

}  // namespace spidersom

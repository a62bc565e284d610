#ifndef POLYURN_SVG_HPP
#define POLYURN_SVG_HPP

// Deterministic SVG renderers for the four standard plot kinds: log-log
// survival curves, the optimal-labor-share line over beta, indicator
// timelines, and three-agent simplex field maps with marked fixed points.
// Output depends only on the input data: fixed canvas, %.6g numbers, no
// timestamps, so identical calls give byte-identical files.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "polyurn/dynamics.hpp"
#include "polyurn/errors.hpp"
#include "polyurn/io.hpp"
#include "polyurn/model.hpp"
#include "polyurn/stats.hpp"

namespace polyurn::svg {

namespace detail {

inline std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

constexpr double kWidth = 640.0, kHeight = 480.0;
constexpr double kLeft = 64.0, kRight = 600.0, kTop = 32.0, kBottom = 432.0;

// Data-to-pixel mapping over the fixed plot frame; log axes take log10 first.
struct Mapper {
    double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
    bool logx = false, logy = false;

    double X(double x) const {
        const double a = logx ? std::log10(x) : x;
        const double lo = logx ? std::log10(xmin) : xmin;
        const double hi = logx ? std::log10(xmax) : xmax;
        return kLeft + (a - lo) / (hi - lo) * (kRight - kLeft);
    }
    double Y(double y) const {
        const double a = logy ? std::log10(y) : y;
        const double lo = logy ? std::log10(ymin) : ymin;
        const double hi = logy ? std::log10(ymax) : ymax;
        return kBottom - (a - lo) / (hi - lo) * (kBottom - kTop);
    }
};

inline std::string open_svg() {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
           num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) +
           "\" font-family=\"monospace\" font-size=\"12\">\n"
           "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

inline std::string line(double x1, double y1, double x2, double y2, const std::string& style) {
    return "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" +
           num(y2) + "\" " + style + "/>\n";
}

inline std::string text(double x, double y, const std::string& s, const std::string& attrs = "") {
    return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" " + attrs + ">" + s + "</text>\n";
}

inline std::string polyline(const std::vector<std::pair<double, double>>& pts,
                            const std::string& style) {
    std::string out = "<polyline fill=\"none\" " + style + " points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i > 0) out += ' ';
        out += num(pts[i].first) + "," + num(pts[i].second);
    }
    return out + "\"/>\n";
}

inline std::string frame_box() {
    return "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" +
           num(kRight - kLeft) + "\" height=\"" + num(kBottom - kTop) +
           "\" fill=\"none\" stroke=\"black\"/>\n";
}

// Ticks at quarter points of a linear axis, or at powers of ten on a log
// axis, with labels on the outside of the frame.
inline std::string x_ticks(const Mapper& m) {
    std::string out;
    if (m.logx) {
        for (int e = static_cast<int>(std::ceil(std::log10(m.xmin) - 1e-9));
             std::pow(10.0, e) <= m.xmax * (1.0 + 1e-9); ++e) {
            const double v = std::pow(10.0, e);
            out += line(m.X(v), kBottom, m.X(v), kBottom + 6, "stroke=\"black\"");
            out += text(m.X(v) - 12, kBottom + 20, "1e" + std::to_string(e));
        }
    } else {
        for (int k = 0; k <= 4; ++k) {
            const double v = m.xmin + (m.xmax - m.xmin) * k / 4.0;
            out += line(m.X(v), kBottom, m.X(v), kBottom + 6, "stroke=\"black\"");
            out += text(m.X(v) - 12, kBottom + 20, num(v));
        }
    }
    return out;
}

inline std::string y_ticks(const Mapper& m) {
    std::string out;
    if (m.logy) {
        for (int e = static_cast<int>(std::ceil(std::log10(m.ymin) - 1e-9));
             std::pow(10.0, e) <= m.ymax * (1.0 + 1e-9); ++e) {
            const double v = std::pow(10.0, e);
            out += line(kLeft - 6, m.Y(v), kLeft, m.Y(v), "stroke=\"black\"");
            out += text(kLeft - 58, m.Y(v) + 4, "1e" + std::to_string(e));
        }
    } else {
        for (int k = 0; k <= 4; ++k) {
            const double v = m.ymin + (m.ymax - m.ymin) * k / 4.0;
            out += line(kLeft - 6, m.Y(v), kLeft, m.Y(v), "stroke=\"black\"");
            out += text(kLeft - 58, m.Y(v) + 4, num(v));
        }
    }
    return out;
}

inline std::string axis_labels(const std::string& x_name, const std::string& y_name) {
    return text(0.5 * (kLeft + kRight) - 6.0 * static_cast<double>(x_name.size()) / 2.0,
                kBottom + 38, x_name) +
           text(8, kTop - 10, y_name);
}

} // namespace detail

// Staircase of the right-continuous survival function in log-log axes; the
// terminal zero-survival point cannot be drawn on a log axis and is dropped.
inline std::string render_survival(const SurvivalCurve& curve) {
    std::vector<std::pair<double, double>> steps; // data coords
    double prev_s = 1.0;
    for (std::size_t k = 0; k < curve.thresholds.size(); ++k) {
        if (!(curve.thresholds[k] > 0.0)) continue;
        steps.push_back({curve.thresholds[k], prev_s});
        if (curve.survival[k] > 0.0) steps.push_back({curve.thresholds[k], curve.survival[k]});
        prev_s = curve.survival[k];
        if (!(prev_s > 0.0)) break;
    }
    if (steps.empty()) raise(errc::empty_table, "survival plot needs positive thresholds");

    detail::Mapper m;
    m.logx = m.logy = true;
    m.xmin = steps.front().first;
    m.xmax = std::max(steps.back().first, m.xmin * 10.0);
    double smin = 1.0;
    for (const auto& p : steps) smin = std::min(smin, p.second);
    m.ymin = std::min(smin, 0.1);
    m.ymax = 1.0;

    std::vector<std::pair<double, double>> px;
    px.reserve(steps.size());
    for (const auto& p : steps) px.push_back({m.X(p.first), m.Y(p.second)});

    std::string out = detail::open_svg();
    out += detail::frame_box();
    out += detail::x_ticks(m) + detail::y_ticks(m);
    out += detail::axis_labels("wealth", "survival");
    out += detail::polyline(px, "stroke=\"steelblue\" stroke-width=\"1.5\"");
    return out + "</svg>\n";
}

// Optimal labor share against the feedback exponent, with the residual field
// norm as a secondary dashed series rescaled to its own maximum.
inline std::string render_rbline(const std::vector<RBPoint>& line) {
    if (line.empty()) raise(errc::empty_table, "r-beta plot needs at least one row");
    detail::Mapper m;
    m.xmin = line.front().beta;
    m.xmax = std::max(line.back().beta, m.xmin + 1e-9);
    m.ymin = 0.0;
    m.ymax = 1.0;

    std::vector<std::pair<double, double>> rpts, gpts;
    double gmax = 0.0;
    for (const RBPoint& pt : line) gmax = std::max(gmax, pt.g_norm);
    for (const RBPoint& pt : line) {
        rpts.push_back({m.X(pt.beta), m.Y(pt.r_star)});
        if (gmax > 0.0) gpts.push_back({m.X(pt.beta), m.Y(pt.g_norm / gmax)});
    }

    std::string out = detail::open_svg();
    out += detail::frame_box();
    out += detail::x_ticks(m) + detail::y_ticks(m);
    out += detail::axis_labels("beta", "r*");
    out += detail::polyline(rpts, "stroke=\"firebrick\" stroke-width=\"1.5\"");
    if (gpts.size() > 1)
        out += detail::polyline(gpts,
                                "stroke=\"gray\" stroke-width=\"1\" stroke-dasharray=\"4 3\"");
    out += detail::text(detail::kRight - 150, detail::kTop + 16, "r* (solid)",
                        "fill=\"firebrick\"");
    out += detail::text(detail::kRight - 150, detail::kTop + 32, "|G| scaled (dashed)",
                        "fill=\"gray\"");
    return out + "</svg>\n";
}

// Winner and positive-field counts over time, with the field norm as a
// dashed series rescaled to its own maximum.
inline std::string render_timeline(const std::vector<io::IndicatorRow>& rows) {
    if (rows.empty()) raise(errc::empty_table, "timeline plot needs at least one row");
    detail::Mapper m;
    m.xmin = rows.front().t;
    m.xmax = std::max(rows.back().t, m.xmin + 1e-9);
    double cmax = 1.0, gmax = 0.0;
    for (const io::IndicatorRow& row : rows) {
        cmax = std::max({cmax, static_cast<double>(row.winners),
                         static_cast<double>(row.positive_field)});
        gmax = std::max(gmax, row.grad_norm);
    }
    m.ymin = 0.0;
    m.ymax = cmax;

    std::vector<std::pair<double, double>> wpts, ppts, gpts;
    for (const io::IndicatorRow& row : rows) {
        wpts.push_back({m.X(row.t), m.Y(static_cast<double>(row.winners))});
        ppts.push_back({m.X(row.t), m.Y(static_cast<double>(row.positive_field))});
        if (gmax > 0.0) gpts.push_back({m.X(row.t), m.Y(row.grad_norm / gmax * cmax)});
    }

    std::string out = detail::open_svg();
    out += detail::frame_box();
    out += detail::x_ticks(m) + detail::y_ticks(m);
    out += detail::axis_labels("t", "count");
    out += detail::polyline(wpts, "stroke=\"steelblue\" stroke-width=\"1.5\"");
    out += detail::polyline(ppts, "stroke=\"seagreen\" stroke-width=\"1.5\"");
    if (gpts.size() > 1)
        out += detail::polyline(gpts,
                                "stroke=\"gray\" stroke-width=\"1\" stroke-dasharray=\"4 3\"");
    out += detail::text(detail::kRight - 190, detail::kTop + 16, "winners", "fill=\"steelblue\"");
    out += detail::text(detail::kRight - 190, detail::kTop + 32, "G_i &gt; 0",
                        "fill=\"seagreen\"");
    out += detail::text(detail::kRight - 190, detail::kTop + 48, "|G| scaled (dashed)",
                        "fill=\"gray\"");
    return out + "</svg>\n";
}

namespace detail {

// Barycentric embedding of the 3-simplex: corners 0, 1, 2 of an equilateral
// triangle fitted to the canvas.
struct Simplex3 {
    double cx[3], cy[3];

    Simplex3() {
        const double side = kRight - kLeft - 40.0;
        const double h = side * std::sqrt(3.0) / 2.0;
        const double x0 = kLeft + 20.0, y0 = kBottom - 20.0;
        cx[0] = x0;
        cy[0] = y0;
        cx[1] = x0 + side;
        cy[1] = y0;
        cx[2] = x0 + side / 2.0;
        cy[2] = y0 - h;
    }
    double X(const Vec& x) const { return x[0] * cx[0] + x[1] * cx[1] + x[2] * cx[2]; }
    double Y(const Vec& x) const { return x[0] * cy[0] + x[1] * cy[1] + x[2] * cy[2]; }
};

} // namespace detail

// Quiver of the share field on the 3-simplex: arrows at barycentric lattice
// points plus markers for every converged fixed point, filled when stable
// (class fp-stable) and open otherwise (class fp-unstable).
inline std::string render_field3(const ModelParams& params) {
    validate_params(params);
    if (params.agents != 3) raise(errc::dimension_mismatch, "field map needs exactly 3 agents");

    const detail::Simplex3 tri;
    std::string out = detail::open_svg();
    out += "<polygon points=\"" + detail::num(tri.cx[0]) + "," + detail::num(tri.cy[0]) + " " +
           detail::num(tri.cx[1]) + "," + detail::num(tri.cy[1]) + " " + detail::num(tri.cx[2]) +
           "," + detail::num(tri.cy[2]) + "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int c = 0; c < 3; ++c) {
        Vec corner(3, 0.0);
        corner[static_cast<std::size_t>(c)] = 1.0;
        out += detail::text(tri.X(corner) - 8 + (c == 1 ? 14 : c == 0 ? -14 : 0),
                            tri.Y(corner) + (c == 2 ? -8 : 16), "x" + std::to_string(c + 1));
    }

    // lattice pass one: field vectors and the largest pixel displacement
    const int n = 15;
    struct Arrow {
        double px, py, dx, dy;
    };
    std::vector<Arrow> arrows;
    double dmax = 0.0;
    for (int i = 1; i < n; ++i)
        for (int j = 1; i + j < n; ++j) {
            const Vec x = {static_cast<double>(i) / n, static_cast<double>(j) / n,
                           static_cast<double>(n - i - j) / n};
            const Vec g = field_g(x, params);
            Arrow a;
            a.px = tri.X(x);
            a.py = tri.Y(x);
            // G sums to zero, so mapping x + G and subtracting stays affine
            a.dx = g[0] * tri.cx[0] + g[1] * tri.cx[1] + g[2] * tri.cx[2];
            a.dy = g[0] * tri.cy[0] + g[1] * tri.cy[1] + g[2] * tri.cy[2];
            dmax = std::max(dmax, std::hypot(a.dx, a.dy));
            arrows.push_back(a);
        }
    const double spacing = (tri.cx[1] - tri.cx[0]) / n;
    const double scale = dmax > 0.0 ? 0.85 * spacing / dmax : 0.0;
    for (const Arrow& a : arrows) {
        const double qx = a.px + a.dx * scale, qy = a.py + a.dy * scale;
        out += detail::line(a.px, a.py, qx, qy, "stroke=\"steelblue\"");
        const double len = std::hypot(qx - a.px, qy - a.py);
        if (len > 1e-12) {
            const double ux = (qx - a.px) / len, uy = (qy - a.py) / len;
            out += "<polygon points=\"" + detail::num(qx) + "," + detail::num(qy) + " " +
                   detail::num(qx - 4 * ux + 2 * uy) + "," + detail::num(qy - 4 * uy - 2 * ux) +
                   " " + detail::num(qx - 4 * ux - 2 * uy) + "," +
                   detail::num(qy - 4 * uy + 2 * ux) + "\" fill=\"steelblue\"/>\n";
        }
    }

    for (const FixedPointReport& fp : find_fixed_points_multistart(params)) {
        if (!fp.converged) continue;
        const bool stable = fp.stability == Stability::stable;
        out += "<circle cx=\"" + detail::num(tri.X(fp.point)) + "\" cy=\"" +
               detail::num(tri.Y(fp.point)) + "\" r=\"6\" class=\"" +
               (stable ? "fp-stable" : "fp-unstable") + "\" fill=\"" +
               (stable ? "black" : "white") + "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
    }
    return out + "</svg>\n";
}

} // namespace polyurn::svg

#endif // POLYURN_SVG_HPP

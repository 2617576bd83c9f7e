#ifndef REGIONS_RENDER_HPP
#define REGIONS_RENDER_HPP

// SVG pictures of the linear regions of a two-input network: each counted
// region is the box clipped by its own halfplanes, drawn as one polygon.

#include "regions/counter.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace regions {

using Point2 = Eigen::Vector2d;
using Polygon = std::vector<Point2>;

/// Halfplanes a . x <= c whose intersection is the closure of the region.
inline std::vector<Halfspace> region_halfspaces(const Network& network, const ActivationPattern& pattern) {
    const auto forms = detail::forced_affine_forms(network, pattern);
    std::vector<Halfspace> out;
    for (std::size_t l = 0; l < network.depth(); ++l) {
        const auto& entry = pattern.layers[l];
        const auto& form = forms[l];
        if (!is_maxout(network.layers[l])) {
            for (std::size_t i = 0; i < entry.size(); ++i) {
                const auto r = static_cast<Eigen::Index>(i);
                const double sign = entry[i] != 0 ? -1.0 : 1.0;
                out.push_back({sign * form.matrix.row(r).transpose(), -sign * form.offset[r]});
            }
            continue;
        }
        const auto k = static_cast<Eigen::Index>(std::get<MaxoutLayer>(network.layers[l]).rank());
        for (std::size_t i = 0; i < entry.size(); ++i) {
            const Eigen::Index base = static_cast<Eigen::Index>(i) * k;
            const Eigen::Index win = base + entry[i];
            for (Eigen::Index o = base; o < base + k; ++o) {
                if (o != win) {
                    out.push_back({(form.matrix.row(o) - form.matrix.row(win)).transpose(),
                                   form.offset[win] - form.offset[o]});
                }
            }
        }
    }
    return out;
}

/// Clips a convex polygon to a . x <= c.
inline Polygon clip_polygon(const Polygon& poly, const Halfspace& h) {
    Polygon out;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2& p = poly[i];
        const Point2& q = poly[(i + 1) % n];
        const double fp = h.normal.dot(p) - h.bound;
        const double fq = h.normal.dot(q) - h.bound;
        if (fp <= 0) {
            out.push_back(p);
        }
        if ((fp < 0 && fq > 0) || (fp > 0 && fq < 0)) {
            const double t = fp / (fp - fq);
            out.push_back(p + t * (q - p));
        }
    }
    return out;
}

inline double polygon_area(const Polygon& poly) {
    double twice = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const auto& p = poly[i];
        const auto& q = poly[(i + 1) % poly.size()];
        twice += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * std::abs(twice);
}

struct RegionPolygon {
    ActivationPattern pattern;
    Polygon vertices;
};

/// One polygon per counted region inside the box.
inline std::vector<RegionPolygon> region_polygons(const Network& network, const Box& box,
                                                  double epsilon = 1e-6) {
    if (network.input_dim != 2) {
        throw std::invalid_argument("rendering needs a network with exactly 2 inputs");
    }
    CounterOptions options;
    options.domain = box;
    options.epsilon = epsilon;
    options.collect_witnesses = true;
    options.region_cap.reset();
    const auto result = count_regions(network, options);
    const Polygon frame{{box.lower[0], box.lower[1]},
                        {box.upper[0], box.lower[1]},
                        {box.upper[0], box.upper[1]},
                        {box.lower[0], box.upper[1]}};
    std::vector<RegionPolygon> polygons;
    for (const auto& w : *result.witnesses) {
        Polygon poly = frame;
        for (const auto& h : region_halfspaces(network, w.pattern)) {
            if (h.normal.norm() == 0.0) {
                continue;
            }
            poly = clip_polygon(poly, h);
        }
        polygons.push_back({w.pattern, std::move(poly)});
    }
    return polygons;
}

namespace detail {

inline std::string svg_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

// Fill colour for region k: hues spread by the golden angle.
inline std::string region_colour(std::size_t k) {
    const double hue = std::fmod(static_cast<double>(k) * 137.50776405, 360.0);
    char buf[48];
    std::snprintf(buf, sizeof buf, "hsl(%.1f,60%%,70%%)", hue);
    return buf;
}

} // namespace detail

inline std::string render_svg(const Network& network, const Box& box, double epsilon = 1e-6, double size = 512.0) {
    const auto polygons = region_polygons(network, box, epsilon);
    const double sx = size / (box.upper[0] - box.lower[0]);
    const double sy = size / (box.upper[1] - box.lower[1]);
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << detail::svg_number(size)
        << "\" height=\"" << detail::svg_number(size) << "\" viewBox=\"0 0 " << detail::svg_number(size) << " "
        << detail::svg_number(size) << "\">\n";
    out << "<title>" << polygons.size() << " linear regions</title>\n";
    for (std::size_t k = 0; k < polygons.size(); ++k) {
        out << "<polygon class=\"region\" fill=\"" << detail::region_colour(k)
            << "\" stroke=\"black\" stroke-width=\"0.5\" points=\"";
        const auto& poly = polygons[k].vertices;
        for (std::size_t i = 0; i < poly.size(); ++i) {
            const double px = (poly[i].x() - box.lower[0]) * sx;
            const double py = (box.upper[1] - poly[i].y()) * sy;
            out << (i ? " " : "") << detail::svg_number(px) << "," << detail::svg_number(py);
        }
        out << "\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

} // namespace regions

#endif

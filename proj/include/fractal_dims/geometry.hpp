#ifndef FRACTAL_DIMS_GEOMETRY_HPP
#define FRACTAL_DIMS_GEOMETRY_HPP

// Polylines, polygons and exact segment-intersection predicates.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "errors.hpp"
#include "ifs.hpp"

namespace fractal_dims {

struct BBox {
    double xmin = 1e300, ymin = 1e300, xmax = -1e300, ymax = -1e300;

    void expand(Vec2 p) {
        xmin = std::min(xmin, p.x);
        ymin = std::min(ymin, p.y);
        xmax = std::max(xmax, p.x);
        ymax = std::max(ymax, p.y);
    }
    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
};

// Open or closed polyline; a closed one does not repeat its first vertex.
struct PolylineCurve {
    std::vector<Vec2> vertices;
    bool closed = false;
    int level = 0;

    std::size_t segment_count() const {
        if (vertices.size() < 2) return 0;
        return closed ? vertices.size() : vertices.size() - 1;
    }
    Vec2 seg_a(std::size_t i) const { return vertices[i]; }
    Vec2 seg_b(std::size_t i) const { return vertices[(i + 1) % vertices.size()]; }

    double length() const {
        double acc = 0.0;
        for (std::size_t i = 0; i < segment_count(); ++i) acc += distance(seg_a(i), seg_b(i));
        return acc;
    }
    BBox bbox() const {
        BBox b;
        for (Vec2 p : vertices) b.expand(p);
        return b;
    }
};

// Simple polygon, vertices in order (counter-clockwise for positive area), not closed-repeated.
struct RegionPolygon {
    std::vector<Vec2> vertices;

    double signed_area() const {
        double acc = 0.0;
        const std::size_t n = vertices.size();
        for (std::size_t i = 0; i < n; ++i) acc += cross(vertices[i], vertices[(i + 1) % n]);
        return 0.5 * acc;
    }
    double area() const { return std::abs(signed_area()); }
    double perimeter() const { return boundary().length(); }
    PolylineCurve boundary() const { return {vertices, true, 0}; }
    BBox bbox() const {
        BBox b;
        for (Vec2 p : vertices) b.expand(p);
        return b;
    }

    // even-odd rule
    bool contains(Vec2 p) const {
        bool in = false;
        const std::size_t n = vertices.size();
        for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
            const Vec2 a = vertices[i], b = vertices[j];
            if ((a.y > p.y) != (b.y > p.y)) {
                const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if (p.x < x) in = !in;
            }
        }
        return in;
    }
};

inline double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double L2 = dot(ab, ab);
    double t = L2 > 0.0 ? dot(p - a, ab) / L2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return distance(p, a + t * ab);
}

namespace detail {

// Coordinates snapped to an integer lattice of pitch 1e-14 for exact orientation tests.
struct SnapPt {
    std::int64_t x, y;
};

inline SnapPt snap(Vec2 p) {
    return {static_cast<std::int64_t>(std::llround(p.x * 1e14)), static_cast<std::int64_t>(std::llround(p.y * 1e14))};
}

inline int orient(SnapPt a, SnapPt b, SnapPt c) {
    const __int128 v = static_cast<__int128>(b.x - a.x) * (c.y - a.y) - static_cast<__int128>(b.y - a.y) * (c.x - a.x);
    return (v > 0) - (v < 0);
}

inline bool on_segment(SnapPt a, SnapPt b, SnapPt p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
           p.y <= std::max(a.y, b.y);
}

}  // namespace detail

// Closed-segment intersection, exact on the snapped lattice.
inline bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
    using namespace detail;
    const SnapPt a = snap(p1), b = snap(p2), c = snap(q1), d = snap(q2);
    const int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(a, b, c)) return true;
    if (o2 == 0 && on_segment(a, b, d)) return true;
    if (o3 == 0 && on_segment(c, d, a)) return true;
    if (o4 == 0 && on_segment(c, d, b)) return true;
    return false;
}

// True if no two non-adjacent segments of the polyline touch. Uniform hash of segment boxes.
inline bool is_simple(const PolylineCurve& c) {
    const std::size_t m = c.segment_count();
    if (m < 3) return true;
    const BBox bb = c.bbox();
    const double cell = std::max({bb.width(), bb.height(), 1e-12}) / std::max(1.0, std::sqrt(double(m)));
    std::unordered_map<std::int64_t, std::vector<std::uint32_t>> grid;
    auto key = [&](std::int64_t i, std::int64_t j) { return i * 4000003LL + j; };
    auto cell_range = [&](std::size_t s, std::int64_t& i0, std::int64_t& i1, std::int64_t& j0, std::int64_t& j1) {
        const Vec2 a = c.seg_a(s), b = c.seg_b(s);
        const double eps = 1e-13;
        i0 = static_cast<std::int64_t>(std::floor((std::min(a.x, b.x) - eps - bb.xmin) / cell));
        i1 = static_cast<std::int64_t>(std::floor((std::max(a.x, b.x) + eps - bb.xmin) / cell));
        j0 = static_cast<std::int64_t>(std::floor((std::min(a.y, b.y) - eps - bb.ymin) / cell));
        j1 = static_cast<std::int64_t>(std::floor((std::max(a.y, b.y) + eps - bb.ymin) / cell));
    };
    for (std::size_t s = 0; s < m; ++s) {
        std::int64_t i0, i1, j0, j1;
        cell_range(s, i0, i1, j0, j1);
        for (auto i = i0; i <= i1; ++i)
            for (auto j = j0; j <= j1; ++j) grid[key(i, j)].push_back(static_cast<std::uint32_t>(s));
    }
    auto adjacent = [&](std::size_t a, std::size_t b) {
        if (a == b) return true;
        const std::size_t d = a > b ? a - b : b - a;
        if (d == 1) return true;
        return c.closed && d == m - 1;
    };
    for (const auto& [k, segs] : grid) {
        for (std::size_t x = 0; x < segs.size(); ++x) {
            for (std::size_t y = x + 1; y < segs.size(); ++y) {
                if (adjacent(segs[x], segs[y])) continue;
                if (segments_intersect(c.seg_a(segs[x]), c.seg_b(segs[x]), c.seg_a(segs[y]), c.seg_b(segs[y]))) return false;
            }
        }
    }
    return true;
}

}  // namespace fractal_dims

#endif  // FRACTAL_DIMS_GEOMETRY_HPP

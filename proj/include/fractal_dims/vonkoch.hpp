#ifndef FRACTAL_DIMS_VONKOCH_HPP
#define FRACTAL_DIMS_VONKOCH_HPP

// Generalized (n,r) von Koch curves and snowflakes.

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "ifs.hpp"
#include "zeta.hpp"

namespace fractal_dims {

struct GKCParams {
    int n = 3;
    double r = 1.0 / 3.0;

    GKCParams() = default;
    GKCParams(int n_, double r_) : n(n_), r(r_) { validate(); }

    void validate() const {
        if (n < 3) throw DomainError("GKC: n must be >= 3");
        if (!(r > 0.0 && r < 1.0)) throw DomainError("GKC: r must lie in (0,1)");
    }
    double ell() const { return 0.5 * (1.0 - r); }
    double theta() const { return 2.0 * std::numbers::pi / n; }
    double alpha_int() const { return std::numbers::pi - 2.0 * std::numbers::pi / n; }
};

// Chain order: phi_L, psi_1, ..., psi_{n-1}, phi_R.
inline SelfSimilarSystem build_system(const GKCParams& p) {
    p.validate();
    const double l = p.ell();
    std::vector<Similitude2> maps;
    maps.emplace_back(l, 0.0, false, Vec2{0.0, 0.0});
    Vec2 start{l, 0.0};
    for (int k = 1; k <= p.n - 1; ++k) {
        Similitude2 psi(p.r, p.alpha_int() - (k - 1) * p.theta(), false, start);
        maps.push_back(psi);
        start = psi(Vec2{1.0, 0.0});
    }
    maps.emplace_back(l, 0.0, false, Vec2{l + p.r, 0.0});
    return SelfSimilarSystem(std::move(maps));
}

inline RatioMultiset gkf_ratios(const GKCParams& p) {
    p.validate();
    return RatioMultiset({{p.ell(), 2}, {p.r, p.n - 1}});
}

// Sufficient bound on r for a simple boundary.
inline double self_avoidance_bound(int n) {
    if (n < 3) throw DomainError("self_avoidance_bound: n must be >= 3");
    const double c = std::cos(std::numbers::pi / n), s = std::sin(std::numbers::pi / n);
    return n % 2 == 0 ? s * s / (c * c + 1.0) : 1.0 - c;
}

// Different value quoted for the hexagonal case in a figure; used only for warnings.
inline constexpr double kHexCaptionBound = 0.1339745962155614;  // 1 - sqrt(3)/2

inline std::vector<std::string> self_avoidance_warnings(const GKCParams& p) {
    std::vector<std::string> w;
    const double b = self_avoidance_bound(p.n);
    if (p.r >= b) {
        w.push_back("r = " + std::to_string(p.r) + " is at or above the self-avoidance bound " + std::to_string(b) +
                    "; region checks skipped");
    }
    if (p.n == 6 && p.r >= std::min(b, kHexCaptionBound) && p.r < std::max(b, kHexCaptionBound)) {
        w.push_back("n = 6, r between 1 - sqrt(3)/2 and 1/7: the two published bounds disagree here");
    }
    return w;
}

inline constexpr std::size_t kDefaultSegmentCap = 20'000'000;

namespace detail {

inline std::vector<cplx> generator_points(const GKCParams& p) {
    const auto sys = build_system(p);
    std::vector<cplx> g;
    g.emplace_back(0.0, 0.0);
    for (const auto& m : sys.maps()) {
        const Vec2 v = m(Vec2{1.0, 0.0});
        g.emplace_back(v.x, v.y);
    }
    g.back() = cplx(1.0, 0.0);
    return g;
}

inline std::vector<cplx> substitute(const std::vector<cplx>& pts, const std::vector<cplx>& gen) {
    std::vector<cplx> out;
    out.reserve((pts.size() - 1) * (gen.size() - 1) + 1);
    out.push_back(pts.front());
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const cplx a = pts[i], d = pts[i + 1] - pts[i];
        for (std::size_t j = 1; j < gen.size(); ++j) out.push_back(a + d * gen[j]);
        out.back() = pts[i + 1];  // keep shared vertices bit-identical
    }
    return out;
}

inline std::size_t checked_segments(int n, int level, std::size_t cap) {
    double segs = std::pow(double(n + 1), level);
    if (segs > double(cap)) throw SizeLimitError("prefractal would have " + std::to_string(segs) + " segments");
    return static_cast<std::size_t>(segs);
}

}  // namespace detail

inline PolylineCurve prefractal(const GKCParams& p, int level, std::size_t cap = kDefaultSegmentCap) {
    if (level < 0) throw DomainError("prefractal: negative level");
    detail::checked_segments(p.n, level, cap);
    const auto gen = detail::generator_points(p);
    std::vector<cplx> pts{cplx(0, 0), cplx(1, 0)};
    for (int k = 0; k < level; ++k) pts = detail::substitute(pts, gen);
    PolylineCurve c;
    c.level = level;
    c.vertices.reserve(pts.size());
    for (auto z : pts) c.vertices.push_back({z.real(), z.imag()});
    return c;
}

struct SnowflakeRegion {
    GKCParams params;
    int level = 0;
    PolylineCurve boundary;           // closed, counter-clockwise
    std::vector<Vec2> ngon_vertices;  // base polygon, counter-clockwise
    std::size_t edge_segments = 1;    // boundary segments per polygon edge
    bool admissible = true;           // r below the self-avoidance bound
    std::vector<std::string> warnings;

    RegionPolygon polygon() const { return {boundary.vertices}; }
    double area() const { return polygon().area(); }
    Vec2 center() const { return {0.0, 0.0}; }
};

inline std::vector<Vec2> regular_ngon(int n) {
    const double R = 0.5 / std::sin(std::numbers::pi / n);
    std::vector<Vec2> v;
    for (int j = 0; j < n; ++j) {
        const double a = 2.0 * std::numbers::pi * j / n;
        v.push_back({R * std::cos(a), R * std::sin(a)});
    }
    return v;
}

// Curve on each edge of a unit-side n-gon, bumps outward.
inline SnowflakeRegion snowflake(const GKCParams& p, int level, std::size_t cap = kDefaultSegmentCap,
                                 bool check_simple = true) {
    if (level < 0) throw DomainError("snowflake: negative level");
    const std::size_t per_edge = detail::checked_segments(p.n, level, cap / std::size_t(p.n));
    SnowflakeRegion s;
    s.params = p;
    s.level = level;
    s.ngon_vertices = regular_ngon(p.n);
    s.edge_segments = per_edge;
    s.warnings = self_avoidance_warnings(p);
    s.admissible = p.r < self_avoidance_bound(p.n);

    const auto curve = prefractal(p, level, cap);
    s.boundary.closed = true;
    s.boundary.level = level;
    s.boundary.vertices.reserve(per_edge * p.n);
    for (int k = 0; k < p.n; ++k) {
        const Vec2 a = s.ngon_vertices[k], b = s.ngon_vertices[(k + 1) % p.n];
        const cplx ca(a.x, a.y), d(b.x - a.x, b.y - a.y);
        // counter-clockwise traversal has the interior on the left; reflect so bumps go right
        for (std::size_t i = 0; i + 1 < curve.vertices.size(); ++i) {
            const cplx z = ca + d * std::conj(cplx(curve.vertices[i].x, curve.vertices[i].y));
            s.boundary.vertices.push_back(i == 0 ? a : Vec2{z.real(), z.imag()});
        }
    }
    if (s.admissible && check_simple && !is_simple(s.boundary)) {
        throw GeometryError("snowflake boundary self-intersects at level " + std::to_string(level));
    }
    return s;
}

// Omega ∩ S for the sector through polygon vertices index, index+1.
inline RegionPolygon sector_region(const SnowflakeRegion& s, int index) {
    const int n = s.params.n;
    if (index < 0 || index >= n) throw DomainError("sector_region: index out of range");
    RegionPolygon poly;
    poly.vertices.push_back(s.center());
    const std::size_t m = s.edge_segments, total = s.boundary.vertices.size();
    for (std::size_t i = 0; i <= m; ++i) poly.vertices.push_back(s.boundary.vertices[(index * m + i) % total]);
    return poly;
}

// The boundary curve lying on polygon edge index, as an open polyline.
inline PolylineCurve edge_curve(const SnowflakeRegion& s, int index) {
    PolylineCurve c;
    c.level = s.level;
    const std::size_t m = s.edge_segments, total = s.boundary.vertices.size();
    for (std::size_t i = 0; i <= m; ++i) c.vertices.push_back(s.boundary.vertices[(index * m + i) % total]);
    return c;
}

}  // namespace fractal_dims

#endif  // FRACTAL_DIMS_VONKOCH_HPP

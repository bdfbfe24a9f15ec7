#ifndef FRACTAL_DIMS_TUBE_HPP
#define FRACTAL_DIMS_TUBE_HPP

// Distance fields on a cell-centred grid, relative tube functions V_{X,Omega}(t),
// scaling checks, Minkowski fits and repeated antiderivatives.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "sampled.hpp"
#include "vonkoch.hpp"

namespace fractal_dims {

// Bounding-volume hierarchy over segments.
class SegmentIndex {
public:
    struct Seg {
        Vec2 a, b;
    };

    explicit SegmentIndex(const PolylineCurve& c) {
        for (std::size_t i = 0; i < c.segment_count(); ++i) segs_.push_back({c.seg_a(i), c.seg_b(i)});
        init();
    }
    explicit SegmentIndex(std::vector<Seg> segs) : segs_(std::move(segs)) { init(); }

    std::size_t size() const { return segs_.size(); }
    const Seg& seg(std::size_t i) const { return segs_[i]; }

    double seg_distance(std::size_t i, Vec2 p) const { return point_segment_distance(p, segs_[i].a, segs_[i].b); }

    double nearest(Vec2 p) const {
        double best = std::numeric_limits<double>::infinity();
        if (nodes_.empty()) return best;
        std::vector<int> stack{0};
        while (!stack.empty()) {
            const Node& nd = nodes_[stack.back()];
            stack.pop_back();
            if (box_point(nd.box, p) >= best) continue;
            if (nd.left < 0) {
                for (int k = nd.begin; k < nd.end; ++k) best = std::min(best, seg_distance(order_[k], p));
                continue;
            }
            const double dl = box_point(nodes_[nd.left].box, p), dr = box_point(nodes_[nd.right].box, p);
            if (dl < dr) {
                stack.push_back(nd.right);
                stack.push_back(nd.left);
            } else {
                stack.push_back(nd.left);
                stack.push_back(nd.right);
            }
        }
        return best;
    }

    // Segments whose bounding box lies within u of the query box.
    void collect(const BBox& q, double u, std::vector<int>& out) const {
        out.clear();
        if (nodes_.empty()) return;
        std::vector<int> stack{0};
        while (!stack.empty()) {
            const Node& nd = nodes_[stack.back()];
            stack.pop_back();
            if (box_box(nd.box, q) > u) continue;
            if (nd.left < 0) {
                for (int k = nd.begin; k < nd.end; ++k) {
                    if (box_box(seg_box(order_[k]), q) <= u) out.push_back(order_[k]);
                }
                continue;
            }
            stack.push_back(nd.left);
            stack.push_back(nd.right);
        }
    }

private:
    struct Node {
        BBox box;
        int left = -1, right = -1;
        int begin = 0, end = 0;
    };

    static double box_point(const BBox& b, Vec2 p) {
        const double dx = std::max({b.xmin - p.x, p.x - b.xmax, 0.0});
        const double dy = std::max({b.ymin - p.y, p.y - b.ymax, 0.0});
        return std::hypot(dx, dy);
    }
    static double box_box(const BBox& a, const BBox& b) {
        const double dx = std::max({a.xmin - b.xmax, b.xmin - a.xmax, 0.0});
        const double dy = std::max({a.ymin - b.ymax, b.ymin - a.ymax, 0.0});
        return std::hypot(dx, dy);
    }
    BBox seg_box(int i) const {
        BBox b;
        b.expand(segs_[i].a);
        b.expand(segs_[i].b);
        return b;
    }

    void init() {
        order_.resize(segs_.size());
        std::iota(order_.begin(), order_.end(), 0);
        if (!segs_.empty()) build(0, int(segs_.size()));
    }

    int build(int begin, int end) {
        const int id = int(nodes_.size());
        nodes_.push_back({});
        BBox box;
        for (int k = begin; k < end; ++k) {
            box.expand(segs_[order_[k]].a);
            box.expand(segs_[order_[k]].b);
        }
        nodes_[id].box = box;
        nodes_[id].begin = begin;
        nodes_[id].end = end;
        if (end - begin <= 4) return id;
        const bool xaxis = box.width() >= box.height();
        const int mid = (begin + end) / 2;
        auto key = [&](int i) {
            const Seg& s = segs_[i];
            return xaxis ? s.a.x + s.b.x : s.a.y + s.b.y;
        };
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                         [&](int a, int b) { return key(a) < key(b); });
        const int l = build(begin, mid);
        const int r = build(mid, end);
        nodes_[id].left = l;
        nodes_[id].right = r;
        return id;
    }

    std::vector<Seg> segs_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
};

struct Grid2 {
    double xmin = 0, ymin = 0, h = 1;
    int nx = 0, ny = 0;
    std::vector<double> values;

    Vec2 center(int i, int j) const { return {xmin + (i + 0.5) * h, ymin + (j + 0.5) * h}; }
    double& at(int i, int j) { return values[std::size_t(j) * nx + i]; }
    double at(int i, int j) const { return values[std::size_t(j) * nx + i]; }
    BBox bbox() const { return {xmin, ymin, xmin + nx * h, ymin + ny * h}; }
};

struct DistanceField {
    Grid2 grid;
    std::vector<std::uint8_t> inside;  // Omega membership of cell centres
    double cap = std::numeric_limits<double>::infinity();
    int level = 0;
};

struct DistanceOptions {
    double cap = std::numeric_limits<double>::infinity();  // distances beyond this are stored as cap
    bool only_inside = true;                               // skip cells outside Omega (stored as +inf)
    std::size_t max_cells = 200'000'000;
};

// Cell centres inside the polygon, by even-odd scanlines.
inline std::vector<std::uint8_t> inside_mask(const RegionPolygon& region, double xmin, double ymin, double h, int nx, int ny) {
    std::vector<std::vector<double>> cross_x(ny);
    const auto& v = region.vertices;
    const std::size_t n = v.size();
    for (std::size_t e = 0; e < n; ++e) {
        const Vec2 a = v[e], b = v[(e + 1) % n];
        if (a.y == b.y) continue;
        const double lo = std::min(a.y, b.y), hi = std::max(a.y, b.y);
        // rows with lo <= y_j < hi (half-open keeps vertex crossings counted once)
        const int j0 = std::max(0, int(std::floor((lo - ymin) / h - 0.5)));
        const int j1 = std::min(ny - 1, int(std::ceil((hi - ymin) / h - 0.5)));
        for (int j = j0; j <= j1; ++j) {
            const double y = ymin + (j + 0.5) * h;
            if (y < lo || y >= hi) continue;
            cross_x[j].push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
        }
    }
    std::vector<std::uint8_t> mask(std::size_t(nx) * ny, 0);
    for (int j = 0; j < ny; ++j) {
        auto& xs = cross_x[j];
        std::sort(xs.begin(), xs.end());
        for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
            const int i0 = std::max(0, int(std::ceil((xs[k] - xmin) / h - 0.5)));
            const int i1 = std::min(nx - 1, int(std::ceil((xs[k + 1] - xmin) / h - 0.5)) - 1);
            for (int i = i0; i <= i1; ++i) mask[std::size_t(j) * nx + i] = 1;
        }
    }
    return mask;
}

// Exact distance from every cell centre to the polyline. Blocks of cells share a
// candidate list that provably contains each cell's nearest segment.
inline DistanceField distance_field(const PolylineCurve& curve, const RegionPolygon& region, double h,
                                    const DistanceOptions& opt = {}) {
    if (!(h > 0.0)) throw DomainError("distance_field: h must be positive");
    if (curve.segment_count() == 0) throw DomainError("distance_field: degenerate curve");
    if (region.vertices.size() < 3) throw DomainError("distance_field: region needs >= 3 vertices");
    const BBox rb = region.bbox();
    DistanceField f;
    f.cap = opt.cap;
    f.level = curve.level;
    Grid2& g = f.grid;
    g.h = h;
    g.xmin = rb.xmin - h;
    g.ymin = rb.ymin - h;
    const double cells = std::ceil((rb.width() + 2 * h) / h) * std::ceil((rb.height() + 2 * h) / h);
    if (cells > double(opt.max_cells)) {
        throw SizeLimitError("distance field would need " + std::to_string(cells) + " cells");
    }
    g.nx = int(std::ceil((rb.width() + 2 * h) / h));
    g.ny = int(std::ceil((rb.height() + 2 * h) / h));
    g.values.assign(std::size_t(g.nx) * g.ny, std::numeric_limits<double>::infinity());
    f.inside = inside_mask(region, g.xmin, g.ymin, h, g.nx, g.ny);

    const SegmentIndex index(curve);
    constexpr int B = 16;
    std::vector<int> cand;
    for (int bj = 0; bj < g.ny; bj += B) {
        for (int bi = 0; bi < g.nx; bi += B) {
            const int i1 = std::min(bi + B, g.nx), j1 = std::min(bj + B, g.ny);
            if (opt.only_inside) {
                bool any = false;
                for (int j = bj; j < j1 && !any; ++j)
                    for (int i = bi; i < i1 && !any; ++i) any = f.inside[std::size_t(j) * g.nx + i];
                if (!any) continue;
            }
            const Vec2 lo = g.center(bi, bj), hi = g.center(i1 - 1, j1 - 1);
            const Vec2 c = 0.5 * (lo + hi);
            const double half = 0.5 * distance(lo, hi);
            const double dc = index.nearest(c);
            if (dc - half >= opt.cap) {
                for (int j = bj; j < j1; ++j)
                    for (int i = bi; i < i1; ++i)
                        if (!opt.only_inside || f.inside[std::size_t(j) * g.nx + i]) g.at(i, j) = opt.cap;
                continue;
            }
            index.collect(BBox{lo.x, lo.y, hi.x, hi.y}, dc + half, cand);
            for (int j = bj; j < j1; ++j) {
                for (int i = bi; i < i1; ++i) {
                    if (opt.only_inside && !f.inside[std::size_t(j) * g.nx + i]) continue;
                    const Vec2 p = g.center(i, j);
                    double best = std::numeric_limits<double>::infinity();
                    for (int s : cand) best = std::min(best, index.seg_distance(s, p));
                    g.at(i, j) = std::min(best, opt.cap);
                }
            }
        }
    }
    return f;
}

// V(t) = h^2 #{inside cells with d < t}, evaluable at any t.
class TubeCounter {
public:
    explicit TubeCounter(const DistanceField& f) : h_(f.grid.h), cap_(f.cap) {
        for (std::size_t k = 0; k < f.inside.size(); ++k) {
            if (f.inside[k]) {
                ++inside_;
                if (f.grid.values[k] < cap_) d_.push_back(f.grid.values[k]);
            }
        }
        std::sort(d_.begin(), d_.end());
    }
    double operator()(double t) const {
        if (t > cap_) throw RangeError("tube evaluated at t = " + std::to_string(t) + " beyond distance cap");
        return h_ * h_ * double(std::lower_bound(d_.begin(), d_.end(), t) - d_.begin());
    }
    double area() const { return h_ * h_ * double(inside_); }
    double h() const { return h_; }
    double cap() const { return cap_; }

private:
    double h_;
    double cap_;
    std::size_t inside_ = 0;
    std::vector<double> d_;
};

inline SampledFunction tube_function(const DistanceField& field, const std::vector<double>& ts) {
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (!(ts[i] > 0.0) || (i > 0 && !(ts[i] > ts[i - 1]))) throw DomainError("tube_function: ts must be positive increasing");
    }
    TubeCounter V(field);
    std::vector<double> v;
    for (double t : ts) v.push_back(V(t));
    nlohmann::json meta{{"kind", "tube"}, {"h", field.grid.h}, {"level", field.level}, {"area", V.area()}};
    return SampledFunction(ts, v, meta);
}

// Grid error budget 4 h * perimeter.
inline double grid_budget(double h, double perimeter) { return 4.0 * h * perimeter; }

struct TubeScalingReport {
    std::vector<double> ts, lhs, rhs, budget;
    double max_rel_dev = 0.0;
    bool pass = true;
};

// V_{phi X, phi Omega}(t) against lambda^2 V_{X,Omega}(t/lambda), two independent grids at the same h.
inline TubeScalingReport verify_tube_scaling(const PolylineCurve& curve, const RegionPolygon& region, const Similitude2& sim,
                                             const std::vector<double>& ts, double h) {
    const double lam = sim.scale();
    PolylineCurve c2 = curve;
    for (auto& v : c2.vertices) v = sim(v);
    RegionPolygon r2 = region;
    for (auto& v : r2.vertices) v = sim(v);
    if (sim.reflect()) std::reverse(r2.vertices.begin(), r2.vertices.end());
    const double tmax = ts.back();
    DistanceOptions o1, o2;
    o1.cap = tmax / lam + 2 * h;
    o2.cap = tmax + 2 * h;
    TubeCounter A(distance_field(curve, region, h, o1)), B(distance_field(c2, r2, h, o2));
    const double per = curve.length() + region.perimeter();
    TubeScalingReport rep;
    for (double t : ts) {
        const double l = B(t), r = lam * lam * A(t / lam);
        const double bud = grid_budget(h, lam * per) + lam * lam * grid_budget(h, per);
        rep.ts.push_back(t);
        rep.lhs.push_back(l);
        rep.rhs.push_back(r);
        rep.budget.push_back(bud);
        if (r > 0) rep.max_rel_dev = std::max(rep.max_rel_dev, std::abs(l - r) / r);
        if (std::abs(l - r) > bud) rep.pass = false;
    }
    return rep;
}

// Hausdorff distance between two polylines, by dense sampling plus the sampling pitch.
inline double polyline_hausdorff(const PolylineCurve& a, const PolylineCurve& b, int samples_per_segment = 64) {
    auto directed = [&](const PolylineCurve& x, const PolylineCurve& y) {
        SegmentIndex iy(y);
        double worst = 0.0, pitch = 0.0;
        for (std::size_t s = 0; s < x.segment_count(); ++s) {
            const Vec2 p = x.seg_a(s), q = x.seg_b(s);
            pitch = std::max(pitch, distance(p, q) / samples_per_segment);
            for (int k = 0; k <= samples_per_segment; ++k) worst = std::max(worst, iy.nearest(p + (double(k) / samples_per_segment) * (q - p)));
        }
        return worst + pitch;
    };
    return std::max(directed(a, b), directed(b, a));
}

// delta_L <= c^L g/(1-c), g = d_H(level 0, level 1), c = largest ratio.
inline double prefractal_hausdorff_bound(const GKCParams& p, int level) {
    const double c = std::max(p.r, p.ell());
    const double g = polyline_hausdorff(prefractal(p, 0), prefractal(p, 1));
    return std::pow(c, level) * g / (1.0 - c);
}

struct SfeReport {
    std::vector<double> ts, V, V_ell, V_r, rho, bound, budget;
    double delta_L = 0.0;
    double bound_constant = 0.0;
    double area = 0.0;
    bool lower_ok = true, upper_ok = true;
    bool pass() const { return lower_ok && upper_ok; }
    std::vector<std::string> warnings;
};

struct SfeOptions {
    bool full_snowflake = false;  // check the whole region (n sectors) instead of one sector
    int sector = 0;
};

inline double sfe_bound_constant(const GKCParams& p, bool full) {
    const double th = p.theta();
    return full ? 2.0 * p.n / std::tan(std::numbers::pi / p.n) + 2.0 * std::numbers::pi
                : 2.0 / std::tan(th / 2.0) + th;
}

// Residual rho(t) = V(t) - 2 l^2 V(t/l) - (n-1) r^2 V(t/r), with 0 <= rho <= C t^2 expected.
// The full-snowflake variant uses V of the whole region with n times the multiplicities
// implied by symmetry (V_full = n V_sector), so the same residual identity applies.
inline SfeReport verify_gkf_sfe(const GKCParams& p, int level, const std::vector<double>& ts, double h,
                                const SfeOptions& opt = {}) {
    if (!(p.r < self_avoidance_bound(p.n))) throw DomainError("verify_gkf_sfe: r must be below the self-avoidance bound");
    if (ts.empty()) throw DomainError("verify_gkf_sfe: no sample times");
    if (ts.front() < 5 * h) throw ResolutionError("t = " + std::to_string(ts.front()) + " below 5h");
    const auto s = snowflake(p, level);
    const RegionPolygon U = opt.full_snowflake ? s.polygon() : sector_region(s, opt.sector);
    const double l = p.ell(), r = p.r;
    SfeReport rep;
    rep.warnings = s.warnings;
    rep.delta_L = prefractal_hausdorff_bound(p, level);
    rep.bound_constant = sfe_bound_constant(p, opt.full_snowflake);
    DistanceOptions o;
    o.cap = ts.back() / std::min(l, r) + rep.delta_L + 4 * h;
    const TubeCounter V(distance_field(s.boundary, U, h, o));
    rep.area = V.area();
    const double per = U.perimeter();
    auto err = [&](double t) {
        const double lo = std::max(t - rep.delta_L, 0.0), hi = std::min(t + rep.delta_L, V.cap());
        return grid_budget(h, per) + (V(hi) - V(lo));
    };
    for (double t : ts) {
        const double v = V(t), vl = V(t / l), vr = V(t / r);
        const double rho = v - 2 * l * l * vl - (p.n - 1) * r * r * vr;
        const double bud = err(t) + 2 * l * l * err(t / l) + (p.n - 1) * r * r * err(t / r);
        const double bnd = rep.bound_constant * t * t;
        rep.ts.push_back(t);
        rep.V.push_back(v);
        rep.V_ell.push_back(vl);
        rep.V_r.push_back(vr);
        rep.rho.push_back(rho);
        rep.bound.push_back(bnd);
        rep.budget.push_back(bud);
        if (rho < -bud) rep.lower_ok = false;
        if (rho > bnd + bud) rep.upper_ok = false;
    }
    return rep;
}

struct MinkowskiFit {
    double D;
    double content;  // exp(intercept): prefactor of t^{2-D}
    double slope;
    int samples;
};

inline MinkowskiFit minkowski_fit(const SampledFunction& f, double tmin, double tmax, int N = 2) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f.ts[i] < tmin || f.ts[i] > tmax) continue;
        if (!(f.vals[i] > 0.0)) throw DomainError("minkowski_fit: nonpositive sample");
        x.push_back(std::log(f.ts[i]));
        y.push_back(std::log(f.vals[i]));
    }
    if (x.size() < 8) throw DomainError("minkowski_fit: need at least 8 samples in window");
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    const double slope = sxy / sxx;
    return {N - slope, std::exp(my - slope * mx), slope, int(x.size())};
}

// Median of successive log-log slopes over the first decade of samples.
inline double leading_exponent(const SampledFunction& f) {
    std::vector<double> sl;
    const double t0 = f.ts.front();
    for (std::size_t i = 0; i + 1 < f.size() && f.ts[i + 1] <= 10 * t0 * (1 + 1e-12); ++i) {
        if (f.vals[i] > 0 && f.vals[i + 1] > 0) sl.push_back(std::log(f.vals[i + 1] / f.vals[i]) / std::log(f.ts[i + 1] / f.ts[i]));
    }
    if (sl.empty() && f.size() >= 2 && f.vals[0] > 0 && f.vals[1] > 0) {
        sl.push_back(std::log(f.vals[1] / f.vals[0]) / std::log(f.ts[1] / f.ts[0]));
    }
    if (sl.empty()) return 0.0;
    std::nth_element(sl.begin(), sl.begin() + sl.size() / 2, sl.end());
    return sl[sl.size() / 2];
}

namespace detail {

// Integral of f over [t0,t1] assuming f is a power law between the two samples.
inline double power_segment(double t0, double t1, double f0, double f1) {
    if (f0 > 0 && f1 > 0) {
        const double q = t1 / t0;
        const double p = std::log(f1 / f0) / std::log(q);
        if (std::abs(p + 1) < 1e-10) return f0 * t0 * std::log(q);
        return f0 * t0 * (std::pow(q, p + 1) - 1) / (p + 1);
    }
    return 0.5 * (f0 + f1) * (t1 - t0);
}

}  // namespace detail

// k-fold antiderivative from 0; the part below ts[0] is a fitted power tail.
inline SampledFunction antiderivative(const SampledFunction& f, int k) {
    if (k < 0) throw DomainError("antiderivative: k must be >= 0");
    SampledFunction cur = f;
    for (int step = 0; step < k; ++step) {
        const double a = leading_exponent(cur);
        std::vector<double> v(cur.size());
        v[0] = (a > -1.0) ? cur.vals[0] * cur.ts[0] / (a + 1.0) : 0.0;
        for (std::size_t i = 1; i < cur.size(); ++i) {
            v[i] = v[i - 1] + detail::power_segment(cur.ts[i - 1], cur.ts[i], cur.vals[i - 1], cur.vals[i]);
        }
        nlohmann::json m = cur.meta;
        m["antiderivative_order"] = m.value("antiderivative_order", 0) + 1;
        cur = SampledFunction(cur.ts, v, m);
    }
    return cur;
}

}  // namespace fractal_dims

#endif  // FRACTAL_DIMS_TUBE_HPP

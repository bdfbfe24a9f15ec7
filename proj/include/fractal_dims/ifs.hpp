#ifndef FRACTAL_DIMS_IFS_HPP
#define FRACTAL_DIMS_IFS_HPP

// Planar similitudes, self-similar systems and Hutchinson iteration.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "errors.hpp"

namespace fractal_dims {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
    friend constexpr bool operator==(Vec2 a, Vec2 b) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

inline Vec2 rotate(Vec2 p, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return {c * p.x - s * p.y, s * p.x + c * p.y};
}

// x -> translation + scale * R(rotation) * F(reflect) * x, where F flips y.
// The scale is stored explicitly so the contraction ratio is exact.
class Similitude2 {
public:
    Similitude2(double scale, double rotation, bool reflect, Vec2 translation)
        : scale_(scale), rotation_(rotation), reflect_(reflect), translation_(translation),
          cos_(std::cos(rotation)), sin_(std::sin(rotation)) {
        if (!(scale > 0.0 && scale < 1.0)) {
            throw DomainError("similitude scale must lie in (0,1), got " + std::to_string(scale));
        }
    }

    double scale() const noexcept { return scale_; }
    double rotation() const noexcept { return rotation_; }
    bool reflect() const noexcept { return reflect_; }
    Vec2 translation() const noexcept { return translation_; }

    Vec2 operator()(Vec2 p) const noexcept {
        const double py = reflect_ ? -p.y : p.y;
        return {translation_.x + scale_ * (cos_ * p.x - sin_ * py),
                translation_.y + scale_ * (sin_ * p.x + cos_ * py)};
    }

private:
    double scale_;
    double rotation_;
    bool reflect_;
    Vec2 translation_;
    double cos_;
    double sin_;
};

inline Vec2 apply(const Similitude2& s, Vec2 p) { return s(p); }

class SelfSimilarSystem {
public:
    explicit SelfSimilarSystem(std::vector<Similitude2> maps) : maps_(std::move(maps)) {
        if (maps_.empty()) throw DomainError("self-similar system needs at least one map");
    }

    std::span<const Similitude2> maps() const noexcept { return maps_; }
    std::size_t size() const noexcept { return maps_.size(); }

    double max_scale() const {
        double m = 0.0;
        for (const auto& s : maps_) m = std::max(m, s.scale());
        return m;
    }

private:
    std::vector<Similitude2> maps_;
};

inline constexpr double kSnapTolerance = 1e-12;
inline constexpr std::size_t kDefaultCloudCap = 10'000'000;

// Finite point set with set semantics: points closer than the snapping
// tolerance (per coordinate) are merged and the storage is kept sorted.
class PointCloud {
public:
    PointCloud() = default;
    explicit PointCloud(std::vector<Vec2> pts) : points_(std::move(pts)) { normalize(); }

    std::span<const Vec2> points() const noexcept { return points_; }
    std::size_t size() const noexcept { return points_.size(); }
    bool empty() const noexcept { return points_.empty(); }

    bool contains(Vec2 p, double tol = kSnapTolerance) const {
        auto it = std::lower_bound(points_.begin(), points_.end(), Vec2{p.x - tol, -1e300}, less);
        for (; it != points_.end() && it->x <= p.x + tol; ++it) {
            if (std::abs(it->y - p.y) <= tol) return true;
        }
        return false;
    }

private:
    static bool less(Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); }

    void normalize() {
        std::sort(points_.begin(), points_.end(), less);
        std::vector<Vec2> out;
        out.reserve(points_.size());
        // Greedy merge within the x-window of each kept point.
        std::vector<char> dead(points_.size(), 0);
        for (std::size_t i = 0; i < points_.size(); ++i) {
            if (dead[i]) continue;
            out.push_back(points_[i]);
            for (std::size_t j = i + 1; j < points_.size() && points_[j].x - points_[i].x <= kSnapTolerance; ++j) {
                if (!dead[j] && std::abs(points_[j].y - points_[i].y) <= kSnapTolerance) dead[j] = 1;
            }
        }
        points_ = std::move(out);
    }

    std::vector<Vec2> points_;
};

inline PointCloud hutchinson(const SelfSimilarSystem& system, const PointCloud& cloud) {
    if (cloud.empty()) throw DomainError("hutchinson: empty cloud");
    std::vector<Vec2> out;
    out.reserve(system.size() * cloud.size());
    for (const auto& map : system.maps()) {
        for (Vec2 p : cloud.points()) out.push_back(map(p));
    }
    return PointCloud(std::move(out));
}

inline PointCloud attractor_points(const SelfSimilarSystem& system, int depth, PointCloud seed,
                                   std::size_t cap = kDefaultCloudCap) {
    if (depth < 0) throw DomainError("attractor_points: negative depth");
    if (seed.empty()) throw DomainError("attractor_points: empty seed");
    for (int k = 0; k < depth; ++k) {
        if (seed.size() > cap / system.size()) {
            throw SizeLimitError("attractor cloud would exceed " + std::to_string(cap) + " points at depth " +
                                 std::to_string(k + 1));
        }
        seed = hutchinson(system, seed);
    }
    return seed;
}

namespace detail {

// Uniform bucket grid over a point set for nearest-neighbour distance queries.
class PointGrid {
public:
    explicit PointGrid(std::span<const Vec2> pts) : pts_(pts) {
        lo_ = {1e300, 1e300};
        Vec2 hi{-1e300, -1e300};
        for (Vec2 p : pts) {
            lo_.x = std::min(lo_.x, p.x);
            lo_.y = std::min(lo_.y, p.y);
            hi.x = std::max(hi.x, p.x);
            hi.y = std::max(hi.y, p.y);
        }
        const double w = std::max(hi.x - lo_.x, 1e-12), hgt = std::max(hi.y - lo_.y, 1e-12);
        const double cells = std::max<double>(1.0, static_cast<double>(pts.size()));
        cell_ = std::max(std::sqrt(w * hgt / cells), std::max(w, hgt) / 4096.0);
        nx_ = static_cast<int>(w / cell_) + 1;
        ny_ = static_cast<int>(hgt / cell_) + 1;
        start_.assign(static_cast<std::size_t>(nx_) * ny_ + 1, 0);
        std::vector<int> key(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            key[i] = cell_index(pts[i]);
            ++start_[key[i] + 1];
        }
        for (std::size_t c = 1; c < start_.size(); ++c) start_[c] += start_[c - 1];
        items_.resize(pts.size());
        std::vector<int> fill(start_.begin(), start_.end() - 1);
        for (std::size_t i = 0; i < pts.size(); ++i) items_[fill[key[i]]++] = static_cast<int>(i);
    }

    double nearest_distance(Vec2 q) const {
        const int cx = std::clamp(static_cast<int>((q.x - lo_.x) / cell_), 0, nx_ - 1);
        const int cy = std::clamp(static_cast<int>((q.y - lo_.y) / cell_), 0, ny_ - 1);
        // Distance from q to the grid box, so ring bounds stay valid for outside queries.
        const double ox = std::max({lo_.x - q.x, q.x - (lo_.x + nx_ * cell_), 0.0});
        const double oy = std::max({lo_.y - q.y, q.y - (lo_.y + ny_ * cell_), 0.0});
        const double outside = std::hypot(ox, oy);
        double best = std::numeric_limits<double>::infinity();
        const int max_ring = std::max(nx_, ny_);
        for (int ring = 0; ring <= max_ring; ++ring) {
            if (best <= outside + (ring - 1) * cell_) break;
            for (int j = cy - ring; j <= cy + ring; ++j) {
                if (j < 0 || j >= ny_) continue;
                const bool edge_row = (j == cy - ring || j == cy + ring);
                for (int i = cx - ring; i <= cx + ring; i += edge_row ? 1 : 2 * ring) {
                    if (i >= 0 && i < nx_) {
                        const int c = j * nx_ + i;
                        for (int k = start_[c]; k < start_[c + 1]; ++k) best = std::min(best, distance(q, pts_[items_[k]]));
                    }
                    if (ring == 0) break;
                }
            }
        }
        return best;
    }

private:
    int cell_index(Vec2 p) const {
        const int i = std::clamp(static_cast<int>((p.x - lo_.x) / cell_), 0, nx_ - 1);
        const int j = std::clamp(static_cast<int>((p.y - lo_.y) / cell_), 0, ny_ - 1);
        return j * nx_ + i;
    }

    std::span<const Vec2> pts_;
    Vec2 lo_;
    double cell_ = 1.0;
    int nx_ = 1, ny_ = 1;
    std::vector<int> start_;
    std::vector<int> items_;
};

inline double directed_hausdorff(std::span<const Vec2> from, std::span<const Vec2> to) {
    PointGrid grid(to);
    double worst = 0.0;
    for (Vec2 p : from) worst = std::max(worst, grid.nearest_distance(p));
    return worst;
}

}  // namespace detail

inline double hausdorff_distance(const PointCloud& a, const PointCloud& b) {
    if (a.empty() || b.empty()) throw DomainError("hausdorff_distance: empty cloud");
    return std::max(detail::directed_hausdorff(a.points(), b.points()),
                    detail::directed_hausdorff(b.points(), a.points()));
}

}  // namespace fractal_dims

#endif  // FRACTAL_DIMS_IFS_HPP

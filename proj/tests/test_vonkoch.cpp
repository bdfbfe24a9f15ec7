#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fractal_dims/vonkoch.hpp"

using namespace fractal_dims;
using std::numbers::pi;

TEST(System, KochGenerator) {
    auto sys = build_system({3, 1.0 / 3});
    ASSERT_EQ(sys.size(), 4u);
    const Vec2 want[] = {{0, 0}, {1.0 / 3, 0}, {0.5, std::sqrt(3.0) / 6}, {2.0 / 3, 0}, {1, 0}};
    for (std::size_t i = 0; i < 4; ++i) {
        const Vec2 a = sys.maps()[i]({0, 0}), b = sys.maps()[i]({1, 0});
        EXPECT_NEAR(a.x, want[i].x, 1e-15);
        EXPECT_NEAR(a.y, want[i].y, 1e-15);
        EXPECT_NEAR(b.x, want[i + 1].x, 1e-15);
        EXPECT_NEAR(b.y, want[i + 1].y, 1e-15);
        EXPECT_NEAR(sys.maps()[i].scale(), 1.0 / 3, 1e-15);
    }
}

TEST(System, ChainContinuity) {
    for (int n = 3; n <= 8; ++n) {
        for (double r : {0.05, 0.1, 0.2}) {
            auto sys = build_system({n, r});
            auto m = sys.maps();
            ASSERT_EQ(m.size(), std::size_t(n + 1));
            for (std::size_t k = 0; k + 1 < m.size(); ++k) {
                EXPECT_LT(distance(m[k]({1, 0}), m[k + 1]({0, 0})), 1e-14) << n << " " << r << " " << k;
            }
            EXPECT_LT(distance(m.front()({0, 0}), {0, 0}), 1e-15);
            EXPECT_LT(distance(m.back()({1, 0}), {1, 0}), 1e-14);
        }
    }
}

TEST(System, Ratios) {
    auto rat = gkf_ratios({5, 0.2});
    ASSERT_EQ(rat.size(), 2u);
    EXPECT_NEAR(rat.entries()[0].ratio, 0.4, 1e-15);
    EXPECT_EQ(rat.entries()[0].multiplicity, 2);
    EXPECT_NEAR(rat.entries()[1].ratio, 0.2, 1e-15);
    EXPECT_EQ(rat.entries()[1].multiplicity, 4);
    auto sys_rat = RatioMultiset::from_system(build_system({5, 0.2}));
    EXPECT_EQ(sys_rat.total_multiplicity(), 6);
}

TEST(Bound, Values) {
    EXPECT_NEAR(self_avoidance_bound(3), 0.5, 1e-15);
    EXPECT_NEAR(self_avoidance_bound(5), 1 - std::cos(pi / 5), 1e-15);
    EXPECT_NEAR(self_avoidance_bound(5), 0.190983, 1e-6);
    EXPECT_NEAR(self_avoidance_bound(6), 1.0 / 7, 1e-15);
}

TEST(Bound, HexWarningBand) {
    EXPECT_TRUE(self_avoidance_warnings({6, 0.1}).empty());
    EXPECT_EQ(self_avoidance_warnings({6, 0.138}).size(), 1u);
    EXPECT_EQ(self_avoidance_warnings({6, 0.2}).size(), 1u);
}

TEST(Prefractal, Basics) {
    auto c0 = prefractal({3, 1.0 / 3}, 0);
    ASSERT_EQ(c0.vertices.size(), 2u);
    auto c1 = prefractal({3, 1.0 / 3}, 1);
    ASSERT_EQ(c1.vertices.size(), 5u);
    EXPECT_NEAR(c1.vertices[2].x, 0.5, 1e-15);
    EXPECT_NEAR(c1.vertices[2].y, std::sqrt(3.0) / 6, 1e-15);
    for (int L = 0; L <= 6; ++L) EXPECT_NEAR(prefractal({3, 1.0 / 3}, L).length(), std::pow(4.0 / 3, L), 1e-11);
    EXPECT_THROW(prefractal({3, 1.0 / 3}, 12, 1000), SizeLimitError);
}

TEST(Prefractal, Invariants) {
    for (auto p : {GKCParams(4, 0.15), GKCParams(5, 0.2), GKCParams(3, 0.25)}) {
        for (int L = 0; L <= 4; ++L) {
            auto c = prefractal(p, L);
            ASSERT_EQ(c.segment_count(), std::size_t(std::pow(p.n + 1, L)));
            EXPECT_EQ(c.vertices.front(), (Vec2{0, 0}));
            EXPECT_EQ(c.vertices.back(), (Vec2{1, 0}));
            EXPECT_NEAR(c.length(), std::pow(2 * p.ell() + (p.n - 1) * p.r, L), 1e-11);
            for (std::size_t i = 0; i < c.segment_count(); ++i) {
                const double len = distance(c.seg_a(i), c.seg_b(i));
                bool ok = false;
                for (int a = 0; a <= L; ++a) ok |= std::abs(len - std::pow(p.r, a) * std::pow(p.ell(), L - a)) < 1e-12;
                EXPECT_TRUE(ok);
            }
        }
    }
}

TEST(Prefractal, EqualsHutchinson) {
    for (auto p : {GKCParams(3, 1.0 / 3), GKCParams(4, 0.15)}) {
        auto sys = build_system(p);
        for (int L = 0; L <= 4; ++L) {
            PointCloud a(prefractal(p, L).vertices);
            PointCloud b = attractor_points(sys, L, PointCloud({{0, 0}, {1, 0}}));
            EXPECT_LT(hausdorff_distance(a, b), 1e-10);
            EXPECT_EQ(a.size(), b.size());
        }
    }
}

TEST(Snowflake, LevelZeroPolygon) {
    for (int n = 3; n <= 8; ++n) {
        auto s = snowflake({n, 0.1}, 0);
        EXPECT_NEAR(s.area(), n / (4 * std::tan(pi / n)), 1e-12);
        EXPECT_GT(s.polygon().signed_area(), 0.0);
    }
}

TEST(Snowflake, KochAreaSeries) {
    for (int L = 0; L <= 6; ++L) {
        double want = std::sqrt(3.0) / 4;
        for (int j = 1; j <= L; ++j) want += 3 * std::pow(4.0, j - 1) * (std::sqrt(3.0) / 4) * std::pow(9.0, -j);
        EXPECT_NEAR(snowflake({3, 1.0 / 3}, L).area(), want, 1e-9) << L;
    }
    EXPECT_NEAR(snowflake({3, 1.0 / 3}, 8).area(), 2 * std::sqrt(3.0) / 5, 1e-3);  // tail ~ (4/9)^8
}

TEST(Snowflake, Symmetry) {
    for (auto p : {GKCParams(3, 1.0 / 3), GKCParams(5, 0.15), GKCParams(6, 0.1)}) {
        auto s = snowflake(p, 3);
        PointCloud a(s.boundary.vertices);
        std::vector<Vec2> rot;
        for (Vec2 v : s.boundary.vertices) rot.push_back(rotate(v, 2 * pi / p.n));
        EXPECT_LT(hausdorff_distance(a, PointCloud(rot)), 1e-9);
    }
}

TEST(Snowflake, Simplicity) {
    for (auto p : {GKCParams(3, 1.0 / 3), GKCParams(3, 0.45), GKCParams(4, 0.15), GKCParams(5, 0.18), GKCParams(6, 0.13)}) {
        for (int L = 1; L <= 5; ++L) {
            if (std::pow(p.n + 1, L) * p.n > 30000) continue;
            auto s = snowflake(p, L);
            EXPECT_TRUE(is_simple(s.boundary)) << p.n << " " << p.r << " " << L;
        }
    }
}

TEST(Snowflake, NonAdmissibleSkipsChecks) {
    auto s = snowflake({6, 0.3}, 2);
    EXPECT_FALSE(s.admissible);
    EXPECT_FALSE(s.warnings.empty());
    // r this large folds the hexaflake onto itself
    EXPECT_FALSE(is_simple(s.boundary));
}

TEST(Snowflake, IntersectionPredicate) {
    EXPECT_TRUE(segments_intersect({0, 0}, {1, 1}, {0, 1}, {1, 0}));
    EXPECT_FALSE(segments_intersect({0, 0}, {1, 0}, {0, 1}, {1, 1}));
    EXPECT_TRUE(segments_intersect({0, 0}, {1, 0}, {1, 0}, {2, 1}));  // touching
    EXPECT_TRUE(segments_intersect({0, 0}, {2, 0}, {1, 0}, {3, 0}));  // collinear overlap
    EXPECT_FALSE(is_simple({{{0, 0}, {1, 0}, {0, 1}, {1, 1}}, true, 0}));
}

TEST(Sector, Partition) {
    for (auto p : {GKCParams(3, 1.0 / 3), GKCParams(4, 0.15), GKCParams(5, 0.2)}) {
        auto s = snowflake(p, 4);
        double total = 0;
        for (int k = 0; k < p.n; ++k) {
            const double a = sector_region(s, k).area();
            EXPECT_NEAR(a, s.area() / p.n, 1e-9);
            total += a;
        }
        EXPECT_NEAR(total, s.area(), 1e-9);
    }
    auto tri = snowflake({3, 1.0 / 3}, 0);
    EXPECT_NEAR(sector_region(tri, 0).area(), std::sqrt(3.0) / 12, 1e-14);
}

TEST(Sector, CurveStaysInWedge) {
    // direct construction equals Omega clipped to the wedge only if the edge curve
    // never leaves the wedge spanned by the two polygon vertices
    for (auto p : {GKCParams(3, 1.0 / 3), GKCParams(3, 0.2), GKCParams(4, 0.15), GKCParams(5, 0.2), GKCParams(6, 0.1)}) {
        auto s = snowflake(p, 4);
        for (int k = 0; k < p.n; ++k) {
            const Vec2 a = s.ngon_vertices[k], b = s.ngon_vertices[(k + 1) % p.n];
            for (Vec2 v : edge_curve(s, k).vertices) {
                EXPECT_GE(cross(a, v), -1e-12);
                EXPECT_LE(cross(b, v), 1e-12);
            }
        }
    }
}

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fractal_dims/ifs.hpp"

using namespace fractal_dims;

namespace {

SelfSimilarSystem cantor_pair() {
    return SelfSimilarSystem({Similitude2(1.0 / 3, 0, false, {0, 0}), Similitude2(1.0 / 3, 0, false, {2.0 / 3, 0})});
}

SelfSimilarSystem koch_system() {
    const double r = 1.0 / 3, pi = std::numbers::pi;
    // hand-built so this test does not depend on vonkoch.hpp
    return SelfSimilarSystem({Similitude2(r, 0, false, {0, 0}),
                              Similitude2(r, pi / 3, false, {1.0 / 3, 0}),
                              Similitude2(r, -pi / 3, false, {0.5, std::sqrt(3.0) / 6}),
                              Similitude2(r, 0, false, {2.0 / 3, 0})});
}

}  // namespace

TEST(Similitude, Apply) {
    Vec2 p = apply(Similitude2(0.5, 0, false, {0, 0}), {1, 0});
    EXPECT_DOUBLE_EQ(p.x, 0.5);
    EXPECT_DOUBLE_EQ(p.y, 0.0);

    p = apply(Similitude2(1.0 / 3, 0, false, {0, 0}), {1, 0});
    EXPECT_NEAR(p.x, 1.0 / 3, 1e-15);

    p = apply(Similitude2(0.5, std::numbers::pi / 2, false, {1, 0}), {1, 0});
    EXPECT_NEAR(p.x, 1.0, 1e-15);
    EXPECT_NEAR(p.y, 0.5, 1e-15);
}

TEST(Similitude, ReflectFlipsY) {
    Vec2 p = Similitude2(0.5, 0, true, {0, 0})({0, 1});
    EXPECT_NEAR(p.y, -0.5, 1e-15);
}

TEST(Similitude, RejectsBadScale) {
    EXPECT_THROW(Similitude2(1.0, 0, false, {0, 0}), DomainError);
    EXPECT_THROW(Similitude2(0.0, 0, false, {0, 0}), DomainError);
    EXPECT_THROW(Similitude2(-0.5, 0, false, {0, 0}), DomainError);
}

TEST(Similitude, ContractsByScale) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-3, 3), sc(0.01, 0.99);
    for (int i = 0; i < 1000; ++i) {
        Similitude2 s(sc(rng), u(rng), i % 2 == 0, {u(rng), u(rng)});
        Vec2 a{u(rng), u(rng)}, b{u(rng), u(rng)};
        const double d0 = distance(a, b);
        EXPECT_NEAR(distance(s(a), s(b)) / d0, s.scale(), 1e-12 * s.scale());
    }
}

TEST(Hutchinson, SingleMap) {
    SelfSimilarSystem sys({Similitude2(0.5, 0, false, {0, 0})});
    auto c = hutchinson(sys, PointCloud({{1, 0}}));
    ASSERT_EQ(c.size(), 1u);
    EXPECT_TRUE(c.contains({0.5, 0}));
}

TEST(Hutchinson, CantorPair) {
    auto c = hutchinson(cantor_pair(), PointCloud({{0, 0}, {1, 0}}));
    ASSERT_EQ(c.size(), 4u);
    for (double x : {0.0, 1.0 / 3, 2.0 / 3, 1.0}) EXPECT_TRUE(c.contains({x, 0}, 1e-15)) << x;
}

TEST(Hutchinson, Monotone) {
    auto sys = koch_system();
    PointCloud a({{0, 0}, {0.3, 0.1}});
    PointCloud b({{0, 0}, {0.3, 0.1}, {1, 0}, {0.5, 0.5}});
    auto ha = hutchinson(sys, a), hb = hutchinson(sys, b);
    for (Vec2 p : ha.points()) EXPECT_TRUE(hb.contains(p));
}

TEST(Hutchinson, EmptyThrows) { EXPECT_THROW(hutchinson(cantor_pair(), PointCloud()), DomainError); }

TEST(Attractor, DepthZeroIsSeed) {
    PointCloud seed({{0, 0}, {1, 0}});
    auto c = attractor_points(cantor_pair(), 0, seed);
    EXPECT_EQ(c.size(), 2u);
}

TEST(Attractor, CantorDepthTwo) {
    auto c = attractor_points(cantor_pair(), 2, PointCloud({{0, 0}, {1, 0}}));
    ASSERT_EQ(c.size(), 8u);
    for (double x : {0.0, 1.0 / 9, 2.0 / 9, 1.0 / 3, 2.0 / 3, 7.0 / 9, 8.0 / 9, 1.0}) {
        EXPECT_TRUE(c.contains({x, 0}, 1e-14)) << x;
    }
}

TEST(Attractor, SizeCap) {
    EXPECT_THROW(attractor_points(koch_system(), 12, PointCloud({{0, 0}, {1, 0}}), 1000), SizeLimitError);
}

TEST(Attractor, GeometricConvergence) {
    for (const auto& sys : {cantor_pair(), koch_system()}) {
        PointCloud seed({{0, 0}, {1, 0}});
        std::vector<double> d;
        for (int k = 1; k <= 8; ++k) {
            d.push_back(hausdorff_distance(attractor_points(sys, k, seed), attractor_points(sys, k + 1, seed)));
        }
        const double C = d[0] / sys.max_scale();  // measured at k=1
        for (int k = 2; k <= 8; ++k) {
            EXPECT_LE(d[k - 1], C * std::pow(sys.max_scale(), k) * (1 + 1e-9)) << k;
        }
    }
}

TEST(Hausdorff, Basics) {
    PointCloud a({{0, 0}, {1, 0}});
    EXPECT_DOUBLE_EQ(hausdorff_distance(a, a), 0.0);
    EXPECT_DOUBLE_EQ(hausdorff_distance(PointCloud({{0, 0}}), PointCloud({{3, 4}})), 5.0);
    EXPECT_DOUBLE_EQ(hausdorff_distance(a, PointCloud({{0, 0}})), 1.0);
    EXPECT_THROW(hausdorff_distance(a, PointCloud()), DomainError);
}

TEST(Hausdorff, MatchesBruteForce) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<Vec2> pa, pb;
    for (int i = 0; i < 300; ++i) pa.push_back({u(rng), 0.2 * u(rng)});
    for (int i = 0; i < 200; ++i) pb.push_back({2 * u(rng), u(rng)});
    PointCloud a(pa), b(pb);
    auto directed = [](const PointCloud& x, const PointCloud& y) {
        double w = 0;
        for (Vec2 p : x.points()) {
            double best = 1e300;
            for (Vec2 q : y.points()) best = std::min(best, distance(p, q));
            w = std::max(w, best);
        }
        return w;
    };
    EXPECT_DOUBLE_EQ(hausdorff_distance(a, b), std::max(directed(a, b), directed(b, a)));
}

TEST(PointCloud, DedupSnaps) {
    PointCloud c({{0, 0}, {1e-13, -1e-13}, {1, 0}});
    EXPECT_EQ(c.size(), 2u);
}

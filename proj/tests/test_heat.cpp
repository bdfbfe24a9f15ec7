#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fractal_dims/heat.hpp"

using namespace fractal_dims;
using std::numbers::pi;

namespace {

RegionPolygon box(double x0, double y0, double x1, double y1) { return {{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}}; }

HeatOptions lean() {
    HeatOptions o;
    o.keep_fields = false;
    return o;
}

}  // namespace

TEST(Oracle, IntervalAndSquare) {
    // small t: each end of the interval takes in 2 sqrt(t/pi)
    for (double t : {1e-6, 1e-5, 1e-4}) EXPECT_NEAR(interval_content(t), 4 * std::sqrt(t / pi), 1e-10);
    EXPECT_NEAR(interval_content(10.0), 1.0, 1e-15);
    EXPECT_NEAR(interval_temperature(0.5, 10.0), 1.0, 1e-15);
    EXPECT_NEAR(interval_temperature(0.0, 0.01), 1.0, 1e-12);
    const double e = interval_content(1e-3);
    EXPECT_DOUBLE_EQ(unit_square_content(1e-3), 2 * e - e * e);
}

TEST(Heat, StripCentreline) {
    // on the mid-line the y factor is within 1e-3 of 1, so the profile across is the interval solution
    const double h = 2.5e-3, t = 0.01;
    auto F = solve_heat_fdm({box(0, 0, 1, 1), 1.0}, h, h * h / 2, t, {t});
    ASSERT_EQ(F.u.size(), 1u);
    const int j = int((0.5 - F.ymin) / h);
    double worst = 0;
    for (int i = 0; i < F.nx; ++i) {
        const std::size_t k = std::size_t(j) * F.nx + i;
        if (!F.mask[k]) continue;
        const double x = F.xmin + (i + 0.5) * h;
        const double want = interval_temperature(x, t);
        worst = std::max(worst, std::abs(F.u[0][k] - want));
        if (want > 0.1) EXPECT_NEAR(F.u[0][k], want, 0.01 * want) << x;
    }
    EXPECT_LT(worst, 0.01);
}

TEST(Heat, UnitSquareOracle) {
    const double h = 2.5e-3;
    auto ts = log_grid(25 * h * h, 1e-2, 6);
    auto E = heat_content(solve_heat_fdm({box(0, 0, 1, 1), 1.0}, h, h * h / 2, 1e-2, ts, lean()));
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double want = unit_square_content(ts[i]);
        EXPECT_NEAR(E.vals[i], want, 0.015 * want) << ts[i];
    }
    // perimeter law E ~ (2/sqrt(pi)) |boundary| sqrt(t), corners in the t term
    auto fit = heat_exponent_fit(E, ts.front(), 1e-2);
    EXPECT_NEAR(fit.p, 0.5, 0.05);
    EXPECT_NEAR(fit.a, 8 / std::sqrt(pi), 0.03 * 8 / std::sqrt(pi));
}

TEST(Heat, MaximumPrincipleAndMonotone) {
    auto s = snowflake({3, 1.0 / 3}, 3);
    const double h = 4e-3;
    auto F = solve_heat_fdm({s.polygon(), 1.0}, h, h * h / 2, 0.05, log_grid(1e-3, 0.05, 6));
    for (std::size_t n = 0; n < F.u.size(); ++n)
        for (std::size_t k = 0; k < F.u[n].size(); ++k) {
            if (!F.mask[k]) {
                EXPECT_EQ(F.u[n][k], 0.0);
                continue;
            }
            EXPECT_GE(F.u[n][k], -1e-9);
            EXPECT_LE(F.u[n][k], 1 + 1e-9);
            if (n > 0) EXPECT_GE(F.u[n][k], F.u[n - 1][k] - 1e-9);
        }
    auto E = heat_content(F);
    for (std::size_t i = 1; i < E.size(); ++i) EXPECT_GT(E.vals[i], E.vals[i - 1]);
    EXPECT_LE(E.vals.back(), s.area());
    std::size_t nb = 0;
    for (auto m : F.mask) nb += m == kBoundaryAdjacent;
    EXPECT_GT(nb, 0u);
}

TEST(Heat, LongTimeAndEarlyTime) {
    const double h = 0.02;
    auto F = solve_heat_fdm({box(0, 0, 1, 1), 1.0}, h, h * h / 2, 20.0, {1e-6, 20.0});
    for (std::size_t k = 0; k < F.mask.size(); ++k)
        if (F.mask[k]) EXPECT_NEAR(F.u[1][k], 1.0, 1e-6);
    EXPECT_NEAR(F.content[1], 1.0, 1e-6);
    EXPECT_LT(F.content[0], 1e-3);
}

TEST(Heat, Diffusivity) {
    // C only rescales time
    const double h = 5e-3;
    auto a = solve_heat_fdm({box(0, 0, 1, 1), 2.0}, h, h * h / 4, 4e-3, {1e-3, 4e-3}, lean());
    auto b = solve_heat_fdm({box(0, 0, 1, 1), 1.0}, h, h * h / 2, 8e-3, {2e-3, 8e-3}, lean());
    for (int i = 0; i < 2; ++i) EXPECT_NEAR(a.content[i], b.content[i], 1e-9 * b.content[i]);
}

TEST(Heat, Errors) {
    EXPECT_THROW(solve_heat_fdm({box(0, 0, 1, 1), 1.0}, 0.1, 0.01, 0.5, {1.0}), DomainError);
    EXPECT_THROW(solve_heat_fdm({box(0, 0, 1, 1), 1.0}, -0.1, 0.01, 0.5, {0.1}), DomainError);
    EXPECT_THROW(solve_heat_fdm({box(0, 0, 1, 1), 0.0}, 0.1, 0.01, 0.5, {0.1}), DomainError);
    HeatOptions o;
    o.max_cells = 100;
    EXPECT_THROW(solve_heat_fdm({box(0, 0, 1, 1), 1.0}, 0.01, 0.01, 0.5, {0.1}, o), SizeLimitError);
}

TEST(Scaling, Identity) {
    auto rep = verify_heat_scaling({box(0, 0, 1, 1), 1.0}, 1.0, {3e-3, 1e-2}, 1e-2);
    EXPECT_TRUE(rep.pass);
    EXPECT_EQ(rep.max_rel_dev, 0.0);
}

TEST(Scaling, SquareHalf) {
    auto rep = verify_heat_scaling({box(0, 0, 1, 1), 1.0}, 0.5, log_grid(4e-4, 1e-2, 4), 4e-3);
    EXPECT_TRUE(rep.pass);
    EXPECT_LE(rep.max_rel_dev, 0.02);
}

TEST(Scaling, RotationOnly) {
    auto rep = verify_heat_scaling({box(0, 0, 1, 1), 1.0}, 1.0, log_grid(1e-3, 1e-2, 4), 4e-3, 0.3);
    EXPECT_TRUE(rep.pass);
}

TEST(Remainder, ExactTilingToy) {
    // unit square cut into four half squares, seams held at 1: content = 4 E_half exactly
    const double h = 4e-3;
    auto ts = log_grid(4e-4, 4e-3, 8);
    auto half = heat_content(solve_heat_fdm({box(0, 0, 0.5, 0.5), 1.0}, h, h * h / 2, 4e-3, ts, lean()));
    std::vector<double> t4;
    for (double t : ts) t4.push_back(4 * t);
    auto unit = heat_content(solve_heat_fdm({box(0, 0, 1, 1), 1.0}, h, h * h / 2, 1.6e-2, t4, lean()));
    std::vector<double> four;
    for (double v : half.vals) four.push_back(4 * v);
    auto R = decomposition_remainder(SampledFunction(ts, four), unit, RatioMultiset({{0.5, 4}}), ts);
    for (std::size_t i = 0; i < ts.size(); ++i) EXPECT_LT(std::abs(R.vals[i]), 0.01 * four[i]) << ts[i];
}

TEST(Remainder, SnowflakeCoarse) {
    const double h = 4e-3;
    auto rep = decomposition_remainder({3, 1.0 / 3}, 3, log_grid(4e-4, 4e-3, 6), h);
    ASSERT_EQ(rep.remainder.size(), 7u);
    EXPECT_GT(rep.C, 0.0);
    // R is a small part of the content it is cut from
    for (std::size_t i = 0; i < rep.remainder.size(); ++i)
        EXPECT_LT(std::abs(rep.remainder.vals[i]), 0.5 * rep.content(rep.remainder.ts[i]));
    EXPECT_THROW(decomposition_remainder({3, 1.0 / 3}, 3, {1e-4, 1e-3}, h), ResolutionError);
    EXPECT_THROW(decomposition_remainder({3, 0.6}, 2, {1e-2, 2e-2}, h), DomainError);
}

TEST(Fit, Synthetic) {
    auto t = log_grid(1e-4, 1e-2, 12);
    std::vector<double> pw, two;
    for (double x : t) {
        pw.push_back(3.0 * std::pow(x, 0.4));
        two.push_back(2.0 * std::pow(x, 0.37) + 0.5 * x);
    }
    auto f = heat_exponent_fit(SampledFunction(t, pw), 1e-4, 1e-2);
    EXPECT_NEAR(f.p, 0.4, 1e-6);
    EXPECT_NEAR(f.a, 3.0, 1e-5);
    EXPECT_NEAR(f.b, 0.0, 1e-5);
    auto g = heat_exponent_fit(SampledFunction(t, two), 1e-4, 1e-2);
    EXPECT_NEAR(g.p, 0.37, 1e-6);
    EXPECT_NEAR(g.b, 0.5, 1e-4);
    EXPECT_THROW(heat_exponent_fit(SampledFunction(t, pw), 1e-4, 2e-4), FitError);
}

TEST(MonteCarlo, SquareWithinThreeSigma) {
    MonteCarloOptions o;
    o.paths = 20000;
    o.workers = 2;
    const std::vector<double> ts{1e-3, 3e-3, 1e-2};
    auto M = monte_carlo_content({box(0, 0, 1, 1), 1.0}, ts, o);
    for (std::size_t i = 0; i < ts.size(); ++i) EXPECT_LT(std::abs(M.content[i] - unit_square_content(ts[i])), 3 * M.sigma[i]);
    auto M2 = monte_carlo_content({box(0, 0, 1, 1), 1.0}, ts, o);
    EXPECT_EQ(M.content, M2.content);  // seeded per worker
}

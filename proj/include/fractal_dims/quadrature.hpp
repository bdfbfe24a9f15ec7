#ifndef FRACTAL_DIMS_QUADRATURE_HPP
#define FRACTAL_DIMS_QUADRATURE_HPP

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace fractal_dims {

using cplx = std::complex<double>;

namespace quad {

// Gauss-Legendre rule on [-1,1], nodes by Newton on P_n.
struct GaussRule {
    std::vector<double> x;
    std::vector<double> w;
};

inline GaussRule gauss_legendre(int n) {
    GaussRule g;
    g.x.resize(n);
    g.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        g.x[i] = -z;
        g.x[n - 1 - i] = z;
        g.w[i] = g.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return g;
}

// G7-K15 pair.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

// One G7-K15 panel of f on the parametrised segment t in [a,b]; returns (kronrod, |k - g|).
template <class F>
std::pair<cplx, double> gk15(F&& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const cplx fc = f(c);
    cplx k = fc * kWgk[7];
    cplx g = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const cplx f1 = f(c - h * kXgk[j]);
        const cplx f2 = f(c + h * kXgk[j]);
        k += kWgk[j] * (f1 + f2);
        if (j % 2 == 1) g += kWg[j / 2] * (f1 + f2);
    }
    k *= h;
    g *= h;
    return {k, std::abs(k - g)};
}

// Adaptive bisection of G7-K15 panels until the local error meets its share of tol.
template <class F>
cplx adaptive_gk(F&& f, double a, double b, double tol, int max_depth = 40) {
    struct Panel {
        double a, b;
        int depth;
    };
    std::vector<Panel> stack{{a, b, 0}};
    cplx total = 0.0;
    const double len = b - a;
    while (!stack.empty()) {
        const Panel p = stack.back();
        stack.pop_back();
        auto [val, err] = gk15(f, p.a, p.b);
        if (err <= tol * (p.b - p.a) / len || p.depth >= max_depth) {
            if (p.depth >= max_depth && err > tol) throw NumericError("adaptive quadrature depth exhausted", err);
            total += val;
        } else {
            const double m = 0.5 * (p.a + p.b);
            stack.push_back({m, p.b, p.depth + 1});
            stack.push_back({p.a, m, p.depth + 1});
        }
    }
    return total;
}

}  // namespace quad
}  // namespace fractal_dims

#endif  // FRACTAL_DIMS_QUADRATURE_HPP

#ifndef FRACTAL_DIMS_MELLIN_HPP
#define FRACTAL_DIMS_MELLIN_HPP

// Truncated Mellin transforms of sampled functions, tube and heat zeta functions,
// and the zeta factorization for solutions of scaling functional equations.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "quadrature.hpp"
#include "sampled.hpp"
#include "zeta.hpp"

namespace fractal_dims {

struct ZetaSample {
    cplx s;
    cplx value;
    double quad_error = 0.0;
};

inline constexpr double kMellinMargin = 1e-3;
inline constexpr double kPoleMargin = 0.05;

namespace detail {

// Piecewise cubic through four neighbouring nodes (shifted inward at the ends).
struct CubicSpline {
    std::vector<double> x, y;

    CubicSpline() = default;
    CubicSpline(std::vector<double> xs, std::vector<double> ys) : x(std::move(xs)), y(std::move(ys)) {}

    std::size_t interval(double u) const {
        auto it = std::upper_bound(x.begin(), x.end(), u);
        std::size_t i = it == x.begin() ? 0 : std::size_t(it - x.begin()) - 1;
        return std::min(i, x.size() - 2);
    }

    double eval(std::size_t i, double u) const {
        const std::size_t n = x.size();
        if (n < 4) {
            const double w = (u - x[i]) / (x[i + 1] - x[i]);
            return (1 - w) * y[i] + w * y[i + 1];
        }
        const std::size_t j = std::min(i == 0 ? 0 : i - 1, n - 4);
        double acc = 0.0;
        for (std::size_t a = j; a < j + 4; ++a) {
            double l = 1.0;
            for (std::size_t b = j; b < j + 4; ++b)
                if (b != a) l *= (u - x[b]) / (x[a] - x[b]);
            acc += l * y[a];
        }
        return acc;
    }
    double operator()(double u) const { return eval(interval(u), u); }
};

inline const quad::GaussRule& cached_rule(int n) {
    static thread_local std::map<int, quad::GaussRule> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, quad::gauss_legendre(n)).first;
    return it->second;
}

}  // namespace detail

// Interpolates f in log t (log-log when f keeps one sign), extends below the first
// sample by the local power law, and integrates t^{s-1} f(t) by Gauss-Legendre in u = log t.
class MellinEvaluator {
public:
    explicit MellinEvaluator(SampledFunction f, std::optional<double> delta = std::nullopt) : f_(std::move(f)) {
        f_.validate();
        if (f_.size() < 4) throw DomainError("MellinEvaluator: need at least 4 samples");
        delta_ = delta.value_or(f_.tmax());
        if (!(delta_ > 0.0) || delta_ > f_.tmax() * (1 + 1e-12)) throw RangeError("MellinEvaluator: delta beyond sampled range");
        bool pos = true, neg = true;
        for (double v : f_.vals) {
            pos &= v > 0;
            neg &= v < 0;
        }
        sign_ = neg ? -1.0 : 1.0;
        log_mode_ = pos || neg;
        full_ = build(1);
        half_ = build(2);
        sigma_hat_ = fit_exponent();
    }

    const SampledFunction& samples() const noexcept { return f_; }
    double delta() const noexcept { return delta_; }
    // f ~ c t^p as t -> 0
    double leading_exponent() const noexcept { return sigma_hat_; }
    // transforms from 0 converge for Re s > abscissa
    double abscissa() const noexcept { return -sigma_hat_; }

    double operator()(double t) const { return value(full_, t); }

    ZetaSample transform(cplx s, double a, double b) const {
        if (a > b) {
            auto z = transform(s, b, a);
            z.value = -z.value;
            return z;
        }
        if (a < 0) throw DomainError("truncated_mellin: negative lower limit");
        if (b > f_.tmax() * (1 + 1e-12)) throw RangeError("truncated_mellin: upper limit " + std::to_string(b) + " beyond samples");
        if (a == 0.0 && !(s.real() > abscissa() + kMellinMargin)) {
            throw DomainError("truncated_mellin: Re s = " + std::to_string(s.real()) + " not right of abscissa " +
                              std::to_string(abscissa()));
        }
        const cplx I1 = integrate(full_, s, a, b), I2 = integrate(half_, s, a, b);
        return {s, I1, std::abs(I1 - I2) / 15.0};
    }

    ZetaSample zeta(cplx s) const { return transform(s, 0.0, delta_); }

private:
    struct Level {
        detail::CubicSpline sp;
        double t0 = 0, tail_c = 0, tail_p = 0;
    };

    Level build(std::size_t stride) const {
        std::vector<double> u, y;
        const std::size_t n = f_.size();
        for (std::size_t i = 0; i < n; i += stride) {
            u.push_back(std::log(f_.ts[i]));
            y.push_back(log_mode_ ? std::log(sign_ * f_.vals[i]) : f_.vals[i]);
        }
        if (u.back() != std::log(f_.ts[n - 1])) {
            u.push_back(std::log(f_.ts[n - 1]));
            y.push_back(log_mode_ ? std::log(sign_ * f_.vals[n - 1]) : f_.vals[n - 1]);
        }
        Level L;
        L.t0 = f_.ts[0];
        if (log_mode_) {
            L.tail_p = (y[1] - y[0]) / (u[1] - u[0]);
            L.tail_c = sign_ * std::exp(y[0]) / std::pow(L.t0, L.tail_p);
        } else {
            L.tail_p = 0.0;
            L.tail_c = y[0];
        }
        L.sp = detail::CubicSpline(std::move(u), std::move(y));
        return L;
    }

    double value(const Level& L, double t) const {
        if (t < L.t0) return L.tail_c * std::pow(t, L.tail_p);
        if (t > f_.tmax() * (1 + 1e-12)) throw RangeError("MellinEvaluator: t beyond samples");
        const double v = L.sp(std::log(t));
        return log_mode_ ? sign_ * std::exp(v) : v;
    }

    cplx integrate(const Level& L, cplx s, double a, double b) const {
        cplx acc = 0.0;
        if (a < L.t0) {
            const double hi = std::min(b, L.t0);
            const cplx q = s + L.tail_p;
            if (a == 0.0 && !(q.real() > 0)) throw DomainError("truncated_mellin: power tail diverges at 0");
            if (std::abs(q) < 1e-14) {
                acc += L.tail_c * std::log(hi / a);
            } else {
                acc += L.tail_c * (std::pow(cplx(hi), q) - (a == 0.0 ? cplx(0.0) : std::pow(cplx(a), q))) / q;
            }
            if (b <= L.t0) return acc;
            a = L.t0;
        }
        const double ua = std::log(a), ub = std::log(b);
        const auto& x = L.sp.x;
        std::size_t i = L.sp.interval(ua);
        for (; i + 1 < x.size() && x[i] < ub; ++i) {
            const double lo = std::max(x[i], ua), hi = std::min(x[i + 1], ub);
            if (hi <= lo) continue;
            // enough nodes to follow the phase of t^{i Im s} across the interval
            const int m = 8 + int(std::ceil(2.0 * std::abs(s.imag()) * (hi - lo)));
            const auto& g = detail::cached_rule(m);
            const double c = 0.5 * (hi + lo), r = 0.5 * (hi - lo);
            for (int k = 0; k < m; ++k) {
                const double u = c + r * g.x[k];
                const double v = L.sp.eval(i, u);
                const double fv = log_mode_ ? sign_ * std::exp(v) : v;
                acc += r * g.w[k] * fv * std::exp(s * u);
            }
        }
        return acc;
    }

    // median of successive log-log slopes over the first decade
    double fit_exponent() const {
        if (!log_mode_) return 0.0;
        std::vector<double> sl;
        const double t0 = f_.ts[0];
        for (std::size_t i = 0; i + 1 < f_.size() && f_.ts[i + 1] <= 10 * t0 * (1 + 1e-12); ++i) {
            sl.push_back(std::log(f_.vals[i + 1] / f_.vals[i]) / std::log(f_.ts[i + 1] / f_.ts[i]));
        }
        if (sl.empty()) sl.push_back(full_.tail_p);
        std::nth_element(sl.begin(), sl.begin() + sl.size() / 2, sl.end());
        return sl[sl.size() / 2];
    }

    SampledFunction f_;
    double delta_ = 0.0;
    double sign_ = 1.0;
    bool log_mode_ = true;
    Level full_, half_;
    double sigma_hat_ = 0.0;
};

inline ZetaSample truncated_mellin(const MellinEvaluator& ev, cplx s, double a, double b) { return ev.transform(s, a, b); }

// t^{-e} f(t)
inline SampledFunction normalized(const SampledFunction& f, double e) {
    std::vector<double> v(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) v[i] = f.vals[i] * std::pow(f.ts[i], -e);
    nlohmann::json m = f.meta;
    m["normalized_by"] = e;
    return SampledFunction(f.ts, std::move(v), std::move(m));
}

struct MellinScalingReport {
    cplx lhs, rhs;
    double deviation = 0.0;  // relative
    double quad_error = 0.0;  // relative
    bool pass = false;
};

// M^beta[f o S_lambda](s) against lambda^{-s}(M^beta[f](s) + M_beta^{lambda beta}[f](s)).
inline MellinScalingReport verify_mellin_scaling(const MellinEvaluator& ev, double lambda, cplx s, double beta,
                                                 double tol = 1e-6) {
    if (!(lambda > 0)) throw DomainError("verify_mellin_scaling: lambda must be positive");
    const auto& f = ev.samples();
    if (lambda * beta > f.tmax() * (1 + 1e-12)) throw RangeError("verify_mellin_scaling: lambda*beta beyond samples");
    const double per_decade = (f.size() - 1) / std::log10(f.tmax() / f.tmin());
    const double lo = std::min(f.tmin(), f.tmin() / lambda);
    auto ts = log_grid(lo, beta, per_decade);
    std::vector<double> g;
    for (double t : ts) g.push_back(ev(lambda * t));
    const MellinEvaluator eg(SampledFunction(ts, g), beta);
    const auto L = eg.zeta(s);
    const auto A = ev.transform(s, 0.0, beta), B = ev.transform(s, beta, lambda * beta);
    const cplx ls = std::pow(cplx(lambda), -s);
    MellinScalingReport rep;
    rep.lhs = L.value;
    rep.rhs = ls * (A.value + B.value);
    const double scale = std::max(std::abs(rep.lhs), 1e-300);
    rep.deviation = std::abs(rep.lhs - rep.rhs) / scale;
    rep.quad_error = (L.quad_error + std::abs(ls) * (A.quad_error + B.quad_error)) / scale;
    rep.pass = rep.deviation <= tol || rep.deviation <= 10 * rep.quad_error;
    return rep;
}

// Largest sampled t with V(t) <= 0.9 area.
inline double default_delta(const SampledFunction& V, double area) {
    double d = V.tmin();
    for (std::size_t i = 0; i < V.size(); ++i)
        if (V.vals[i] <= 0.9 * area) d = V.ts[i];
    return d;
}

// int_0^delta t^{s-3} V(t) dt
inline ZetaSample tube_zeta(const SampledFunction& V, cplx s, double delta) {
    return MellinEvaluator(normalized(V, 2.0), delta).zeta(s);
}

// int_0^delta t^{s-2} E(t) dt
inline ZetaSample heat_zeta(const SampledFunction& E, cplx s, double delta) {
    return MellinEvaluator(normalized(E, 1.0), delta).zeta(s);
}

// sum_k a_k lambda_k^{alpha s} M_delta^{delta/lambda_k^alpha}[f](s)
inline ZetaSample partial_xi(const RatioMultiset& ratios, const MellinEvaluator& f, cplx s, double delta, double alpha = 1.0) {
    if (!(alpha > 0)) throw DomainError("partial_xi: alpha must be positive");
    ZetaSample out{s, 0.0, 0.0};
    for (auto e : ratios.entries()) {
        const double la = std::pow(e.ratio, alpha);
        const auto z = f.transform(s, delta, delta / la);
        const cplx w = double(e.multiplicity) * std::pow(cplx(la), s);
        out.value += w * z.value;
        out.quad_error += std::abs(w) * z.quad_error;
    }
    return out;
}

inline ZetaSample partial_xi(const RatioMultiset& ratios, const SampledFunction& f, cplx s, double delta, double alpha = 1.0) {
    return partial_xi(ratios, MellinEvaluator(f), s, delta, alpha);
}

struct ZetaIdentityPoint {
    cplx s;
    cplx zeta_f, zeta_L, xi, zeta_R;
    double deviation = 0.0;   // relative
    double quad_error = 0.0;  // relative
};

struct ZetaIdentityReport {
    std::vector<ZetaIdentityPoint> points;
    std::vector<cplx> rejected;  // too close to a pole of zeta_L
    double max_deviation = 0.0;
    double tol = 0.0;
    bool pass = false;
};

struct ZetaIdentityOptions {
    double tol = 1e-5;
    double pole_margin = kPoleMargin;
};

// zeta_f(s) = zeta_L(alpha s) (xi(s) + zeta_R(s)), zeta_L = 1/(1 - sum a_k lambda_k^s).
inline ZetaIdentityReport verify_zeta_identity(const RatioMultiset& ratios, const SampledFunction& f, const SampledFunction& R,
                                               const std::vector<cplx>& s_list, double delta, double alpha = 1.0,
                                               const ZetaIdentityOptions& opt = {}) {
    const DirichletPoly P(ratios);
    const MellinEvaluator ef(f), eR(R);
    ZetaIdentityReport rep;
    rep.tol = opt.tol;
    for (cplx s : s_list) {
        const cplx p = P(alpha * s), dp = P.derivative(alpha * s);
        if (std::abs(dp) > 0 && std::abs(p) / (alpha * std::abs(dp)) < opt.pole_margin) {
            rep.rejected.push_back(s);
            continue;
        }
        ZetaIdentityPoint pt;
        pt.s = s;
        const auto zf = ef.transform(s, 0.0, delta);
        const auto zr = eR.transform(s, 0.0, delta);
        const auto xi = partial_xi(ratios, ef, s, delta, alpha);
        pt.zeta_f = zf.value;
        pt.zeta_L = 1.0 / p;
        pt.xi = xi.value;
        pt.zeta_R = zr.value;
        const double scale = std::max(std::abs(zf.value), 1e-300);
        pt.deviation = std::abs(zf.value - pt.zeta_L * (xi.value + zr.value)) / scale;
        pt.quad_error = (zf.quad_error + std::abs(pt.zeta_L) * (xi.quad_error + zr.quad_error)) / scale;
        rep.max_deviation = std::max(rep.max_deviation, pt.deviation);
        rep.points.push_back(pt);
    }
    rep.pass = !rep.points.empty() && rep.max_deviation <= opt.tol;
    return rep;
}

}  // namespace fractal_dims

#endif  // FRACTAL_DIMS_MELLIN_HPP

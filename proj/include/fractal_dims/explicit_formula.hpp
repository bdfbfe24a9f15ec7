#ifndef FRACTAL_DIMS_EXPLICIT_FORMULA_HPP
#define FRACTAL_DIMS_EXPLICIT_FORMULA_HPP

// Pointwise explicit formulae (k >= 2): symmetric partial sums over complex dimensions.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "errors.hpp"
#include "mellin.hpp"
#include "sampled.hpp"
#include "zeta.hpp"

namespace fractal_dims {

// (z)_k = z (z+1) ... (z+k-1)
inline cplx pochhammer(cplx z, int k) {
    if (k < 0) throw DomainError("pochhammer: negative order");
    cplx p = 1.0;
    for (int j = 0; j < k; ++j) p *= z + double(j);
    return p;
}

struct FormulaTerm {
    cplx omega;
    cplx coeff;  // residue / pochhammer
    cplx exponent;
    cplx poch_denominator;
    cplx operator()(double t) const { return coeff * std::pow(cplx(t), exponent); }
};

struct TermBuild {
    std::vector<FormulaTerm> terms;
    std::vector<std::string> warnings;
};

// zeta_residues[i] is the residue of s -> zeta_f(s/alpha; delta) at dims.poles[i].omega.
inline TermBuild build_terms(const ComplexDimensionSet& dims, const std::vector<cplx>& zeta_residues, double beta, double alpha,
                             int k) {
    if (zeta_residues.size() != dims.poles.size()) throw DomainError("build_terms: one residue per pole required");
    if (!(alpha > 0)) throw DomainError("build_terms: alpha must be positive");
    TermBuild out;
    for (std::size_t i = 0; i < dims.poles.size(); ++i) {
        const auto& p = dims.poles[i];
        if (p.multiplicity != 1) {
            out.warnings.push_back("pole " + std::to_string(p.omega.real()) + "+" + std::to_string(p.omega.imag()) +
                                   "i has multiplicity " + std::to_string(p.multiplicity) + "; skipped");
            continue;
        }
        FormulaTerm t;
        t.omega = p.omega;
        t.exponent = (beta - p.omega) / alpha + double(k);
        t.poch_denominator = pochhammer((beta - p.omega) / alpha + 1.0, k);
        if (std::abs(t.poch_denominator) < 1e-300) throw NumericError("build_terms: vanishing Pochhammer denominator", 0.0);
        t.coeff = zeta_residues[i] / t.poch_denominator;
        out.terms.push_back(t);
    }
    return out;
}

struct PartialSumSeries {
    std::vector<double> ts;
    std::vector<double> im_cutoffs;
    std::vector<std::vector<double>> sums;  // [cutoff][t]
    std::vector<double> leakage;             // max |Im| per cutoff
};

inline const std::vector<double> kDefaultCutoffs{10, 20, 40, 80, 160};

inline PartialSumSeries evaluate_sum(std::vector<FormulaTerm> terms, const std::vector<double>& ts,
                                     std::vector<double> cutoffs = kDefaultCutoffs) {
    std::sort(cutoffs.begin(), cutoffs.end());
    // fixed summation order keeps partial sums reproducible
    std::stable_sort(terms.begin(), terms.end(), [](const FormulaTerm& a, const FormulaTerm& b) {
        const double ia = std::abs(a.omega.imag()), ib = std::abs(b.omega.imag());
        if (ia != ib) return ia < ib;
        return a.omega.imag() < b.omega.imag();
    });
    PartialSumSeries out;
    out.ts = ts;
    out.im_cutoffs = cutoffs;
    std::vector<cplx> acc(ts.size(), 0.0);
    std::size_t next = 0;
    for (double T : cutoffs) {
        while (next < terms.size() && std::abs(terms[next].omega.imag()) <= T * (1 + 1e-12)) {
            for (std::size_t i = 0; i < ts.size(); ++i) acc[i] += terms[next](ts[i]);
            ++next;
        }
        std::vector<double> re(ts.size());
        double leak = 0.0;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            re[i] = acc[i].real();
            leak = std::max(leak, std::abs(acc[i].imag()));
        }
        out.sums.push_back(std::move(re));
        out.leakage.push_back(leak);
    }
    return out;
}

// zeta_f(s/alpha; delta) continued through the factorization zeta_Phi(s) (xi(s/alpha) + zeta_R(s/alpha)).
class ContinuedZeta {
public:
    ContinuedZeta(RatioMultiset ratios, SampledFunction f, SampledFunction R, double delta, double alpha = 1.0)
        : P_(ratios), ratios_(std::move(ratios)), f_(std::move(f)), R_(std::move(R)), delta_(delta), alpha_(alpha) {}

    cplx operator()(cplx s) const {
        const cplx z = s / alpha_;
        const auto xi = partial_xi(ratios_, f_, z, delta_, alpha_);
        const auto zr = R_.transform(z, 0.0, delta_);
        return (xi.value + zr.value) / P_(s);
    }

    // 256-node circle of radius min(0.1, half the distance to the nearest other pole).
    std::vector<cplx> residues(const ComplexDimensionSet& dims, int nodes = 256) const {
        std::vector<cplx> out;
        for (std::size_t i = 0; i < dims.poles.size(); ++i) {
            double dmin = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < dims.poles.size(); ++j)
                if (j != i) dmin = std::min(dmin, std::abs(dims.poles[i].omega - dims.poles[j].omega));
            const double r = std::min(0.1, 0.5 * dmin);
            out.push_back(contour_residue(*this, dims.poles[i].omega, r, nodes));
        }
        return out;
    }

    const DirichletPoly& poly() const noexcept { return P_; }

private:
    DirichletPoly P_;
    RatioMultiset ratios_;
    MellinEvaluator f_, R_;
    double delta_, alpha_;
};

struct ExplicitReport {
    std::vector<double> ts, direct, series, residual;
    double max_rel_dev = 0.0;
    double slope = std::numeric_limits<double>::quiet_NaN();
    double expected_exp = 0.0;
    bool floor_case = false;
    bool slope_ok = false;
};

// Residual against the largest cutoff; log-log slope of |residual|.
inline ExplicitReport compare_explicit(const SampledFunction& direct, const PartialSumSeries& series, double expected_remainder_exp,
                                       double floor = 0.0) {
    if (series.sums.empty()) throw DomainError("compare_explicit: empty series");
    ExplicitReport rep;
    rep.expected_exp = expected_remainder_exp;
    const auto& best = series.sums.back();
    double maxabs = 0.0;
    for (std::size_t i = 0; i < series.ts.size(); ++i) {
        const double t = series.ts[i];
        if (t < direct.tmin() || t > direct.tmax()) continue;
        const double d = direct(t);
        rep.ts.push_back(t);
        rep.direct.push_back(d);
        rep.series.push_back(best[i]);
        rep.residual.push_back(d - best[i]);
        rep.max_rel_dev = std::max(rep.max_rel_dev, std::abs(d - best[i]) / std::abs(d));
        maxabs = std::max(maxabs, std::abs(d));
    }
    if (rep.ts.size() < 2) throw DomainError("compare_explicit: no overlapping t range");
    const double fl = std::max(floor, 1e-13 * maxabs);
    bool all_below = true;
    std::vector<double> x, y;
    for (std::size_t i = 0; i < rep.ts.size(); ++i) {
        if (std::abs(rep.residual[i]) > fl) {
            all_below = false;
            x.push_back(std::log(rep.ts[i]));
            y.push_back(std::log(std::abs(rep.residual[i])));
        }
    }
    if (all_below || x.size() < 3) {
        rep.floor_case = true;
        rep.slope_ok = true;
        return rep;
    }
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    rep.slope = sxy / sxx;
    rep.slope_ok = rep.slope >= expected_remainder_exp - 0.15;
    return rep;
}

// Fractal string: intervals of length l with multiplicity m; V(t) = sum m min(l, 2t).
struct FractalString {
    std::vector<std::pair<double, double>> intervals;

    // antiderivatives of min(l, 2t) from 0, k = 0, 1, 2
    static double piece(double l, double t, int k) {
        const bool small = 2 * t <= l;
        switch (k) {
            case 0: return small ? 2 * t : l;
            case 1: return small ? t * t : l * t - l * l / 4;
            case 2: return small ? t * t * t / 3 : l * t * t / 2 - l * l * t / 4 + l * l * l / 24;
            default: throw DomainError("FractalString: k must be 0, 1 or 2");
        }
    }

    double tube(double t, int k = 0) const {
        double acc = 0.0;
        for (auto [l, m] : intervals) acc += m * piece(l, t, k);
        return acc;
    }
};

// lengths 3^{-n} with multiplicity 2^{n-1}
inline FractalString cantor_string(int levels = 120) {
    FractalString s;
    for (int n = 1; n <= levels; ++n) s.intervals.emplace_back(std::pow(3.0, -n), std::pow(2.0, n - 1));
    return s;
}

}  // namespace fractal_dims

#endif  // FRACTAL_DIMS_EXPLICIT_FORMULA_HPP

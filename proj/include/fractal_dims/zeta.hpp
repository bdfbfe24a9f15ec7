#ifndef FRACTAL_DIMS_ZETA_HPP
#define FRACTAL_DIMS_ZETA_HPP

// Scaling ratios, Dirichlet polynomials P(s) = 1 - sum a_k lambda_k^s,
// similarity dimensions, lattice detection and pole location.

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "ifs.hpp"
#include "quadrature.hpp"

namespace fractal_dims {

struct RatioEntry {
    double ratio;
    int multiplicity;
};

// Ratios strictly decreasing, equal ratios (to 1e-14 relative) merged.
class RatioMultiset {
public:
    RatioMultiset() = default;
    explicit RatioMultiset(std::vector<RatioEntry> entries) {
        for (const auto& e : entries) {
            if (!(e.ratio > 0.0 && e.ratio < 1.0)) throw DomainError("ratio must lie in (0,1): " + std::to_string(e.ratio));
            if (e.multiplicity < 1) throw DomainError("multiplicity must be >= 1");
        }
        std::sort(entries.begin(), entries.end(), [](auto a, auto b) { return a.ratio > b.ratio; });
        for (const auto& e : entries) {
            if (!entries_.empty() && std::abs(entries_.back().ratio - e.ratio) <= 1e-14 * e.ratio) {
                entries_.back().multiplicity += e.multiplicity;
            } else {
                entries_.push_back(e);
            }
        }
    }

    static RatioMultiset from_system(const SelfSimilarSystem& sys) {
        std::vector<RatioEntry> e;
        for (const auto& m : sys.maps()) e.push_back({m.scale(), 1});
        return RatioMultiset(std::move(e));
    }

    std::span<const RatioEntry> entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    int total_multiplicity() const {
        int n = 0;
        for (auto e : entries_) n += e.multiplicity;
        return n;
    }

private:
    std::vector<RatioEntry> entries_;
};

class DirichletPoly {
public:
    DirichletPoly() = default;
    explicit DirichletPoly(RatioMultiset ratios) : ratios_(std::move(ratios)) {
        for (auto e : ratios_.entries()) logs_.push_back(std::log(e.ratio));
    }

    const RatioMultiset& ratios() const noexcept { return ratios_; }

    // sum a_k lambda_k^s
    cplx sum(cplx s) const {
        cplx acc = 0.0;
        auto e = ratios_.entries();
        for (std::size_t k = 0; k < e.size(); ++k) acc += double(e[k].multiplicity) * std::exp(s * logs_[k]);
        return acc;
    }
    cplx operator()(cplx s) const { return 1.0 - sum(s); }
    cplx derivative(cplx s) const {
        cplx acc = 0.0;
        auto e = ratios_.entries();
        for (std::size_t k = 0; k < e.size(); ++k) acc -= double(e[k].multiplicity) * logs_[k] * std::exp(s * logs_[k]);
        return acc;
    }
    // Sum of |terms| at Re s: the natural scale for "is P small here".
    double magnitude(double sigma) const {
        double acc = 1.0;
        auto e = ratios_.entries();
        for (std::size_t k = 0; k < e.size(); ++k) acc += e[k].multiplicity * std::exp(sigma * logs_[k]);
        return acc;
    }
    double real(double sigma) const { return 1.0 - sum(cplx(sigma, 0.0)).real(); }
    double real_derivative(double sigma) const { return derivative(cplx(sigma, 0.0)).real(); }

private:
    RatioMultiset ratios_;
    std::vector<double> logs_;
};

namespace detail {

// Bracket an increasing function's root by doubling, then bisect and Newton-polish.
template <class F, class DF>
double increasing_root(F&& f, DF&& df, double tol = 1e-14) {
    double lo = -1.0, hi = 1.0;
    for (int i = 0; i < 200 && f(lo) > 0.0; ++i) lo *= 2.0;
    for (int i = 0; i < 200 && f(hi) < 0.0; ++i) hi *= 2.0;
    if (f(lo) > 0.0 || f(hi) < 0.0) throw NumericError("could not bracket root", f(lo));
    for (int i = 0; i < 200 && hi - lo > 1e-9 * (1.0 + std::abs(lo)); ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? lo : hi) = mid;
    }
    double x = 0.5 * (lo + hi);
    for (int i = 0; i < 50; ++i) {
        const double step = f(x) / df(x);
        const double nx = x - step;
        if (!(nx >= lo - 1e-9 && nx <= hi + 1e-9)) break;
        x = nx;
        if (std::abs(step) < tol * (1.0 + std::abs(x))) break;
    }
    return x;
}

}  // namespace detail

// Unique real root of the Moran equation.
inline double similarity_dimension(const RatioMultiset& ratios) {
    if (ratios.empty()) throw DomainError("similarity_dimension: empty ratio set");
    DirichletPoly p(ratios);
    // P is increasing on the reals (sum of decaying exponentials subtracted from 1)
    return detail::increasing_root([&](double t) { return p.real(t); },
                                   [&](double t) { return p.real_derivative(t); });
}
inline double similarity_dimension(const DirichletPoly& p) { return similarity_dimension(p.ratios()); }

// p(t) = (1/m_M) r_M^{-t} + sum_{k<M} (m_k/m_M)(r_k/r_M)^t, increasing in t.
inline double lower_poly(const RatioMultiset& ratios, double t) {
    auto e = ratios.entries();
    const auto last = e.back();
    double acc = std::exp(-t * std::log(last.ratio)) / last.multiplicity;
    for (std::size_t k = 0; k + 1 < e.size(); ++k) {
        acc += double(e[k].multiplicity) / last.multiplicity * std::exp(t * std::log(e[k].ratio / last.ratio));
    }
    return acc;
}

inline double lower_similarity_dimension(const RatioMultiset& ratios) {
    if (ratios.empty()) throw DomainError("lower_similarity_dimension: empty ratio set");
    auto e = ratios.entries();
    const auto last = e.back();
    auto dp = [&](double t) {
        double acc = -std::log(last.ratio) * std::exp(-t * std::log(last.ratio)) / last.multiplicity;
        for (std::size_t k = 0; k + 1 < e.size(); ++k) {
            const double l = std::log(e[k].ratio / last.ratio);
            acc += double(e[k].multiplicity) / last.multiplicity * l * std::exp(t * l);
        }
        return acc;
    };
    return detail::increasing_root([&](double t) { return lower_poly(ratios, t) - 1.0; }, dp);
}

struct LatticeExponent {
    int k;
    int multiplicity;
};

struct LatticeStructure {
    double generator;
    std::vector<LatticeExponent> exponents;
};

namespace detail {

// Best rational p/q with q <= max_den by continued fractions; nullopt if none within tol.
inline std::optional<std::pair<long long, long long>> rationalize(double x, int max_den, double tol) {
    long long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    double y = x;
    for (int it = 0; it < 64; ++it) {
        const double a = std::floor(y);
        const long long ai = static_cast<long long>(a);
        const long long h2 = ai * h1 + h0, k2 = ai * k1 + k0;
        if (k2 > max_den) break;
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        if (std::abs(x - double(h1) / double(k1)) <= tol * std::max(1.0, std::abs(x))) return std::pair{h1, k1};
        const double frac = y - a;
        if (frac < 1e-300) break;
        y = 1.0 / frac;
    }
    return std::nullopt;
}

}  // namespace detail

inline std::optional<LatticeStructure> detect_lattice(const RatioMultiset& ratios, int max_denominator = 64,
                                                      double tol = 1e-12) {
    if (max_denominator < 1) throw DomainError("detect_lattice: max_denominator must be >= 1");
    if (ratios.empty()) throw DomainError("detect_lattice: empty ratio set");
    auto e = ratios.entries();
    const double l1 = std::log(e[0].ratio);
    std::vector<std::pair<long long, long long>> q;
    long long lcm = 1;
    for (auto r : e) {
        auto pq = detail::rationalize(std::log(r.ratio) / l1, max_denominator, tol);
        if (!pq) return std::nullopt;
        q.push_back(*pq);
        lcm = std::lcm(lcm, pq->second);
    }
    std::vector<long long> k;
    long long g = 0;
    for (auto [p, d] : q) {
        k.push_back(p * (lcm / d));
        g = std::gcd(g, k.back());
    }
    LatticeStructure s;
    s.generator = std::exp(l1 * double(g) / double(lcm));
    for (std::size_t i = 0; i < e.size(); ++i) {
        const int ki = static_cast<int>(k[i] / g);
        if (std::abs(std::log(e[i].ratio) - ki * std::log(s.generator)) > 1e-10 * std::abs(std::log(e[i].ratio))) {
            return std::nullopt;
        }
        s.exponents.push_back({ki, e[i].multiplicity});
    }
    return s;
}

struct Pole {
    cplx omega;
    cplx residue;
    int multiplicity = 1;
};

struct PoleWindow {
    double re_min;
    double re_max;
    double im_max;
};

struct ComplexDimensionSet {
    std::vector<Pole> poles;
    PoleWindow window{0.0, 0.0, 0.0};
    std::optional<LatticeStructure> lattice;
    double alpha = 1.0;
};

inline constexpr double kNearPoleTol = 1e-13;
inline constexpr double kPoleTol = 1e-10;

inline cplx zeta_eval(const DirichletPoly& poly, cplx s, double near_pole_tol = kNearPoleTol) {
    const cplx p = poly(s);
    if (std::abs(p) <= near_pole_tol) throw PoleProximityError(std::abs(p));
    return 1.0 / p;
}

inline cplx residue_simple(const DirichletPoly& poly, cplx omega) {
    if (std::abs(poly(omega)) >= kPoleTol) throw DomainError("residue_simple: not a pole, |P| = " + std::to_string(std::abs(poly(omega))));
    const cplx d = poly.derivative(omega);
    if (std::abs(d) <= 1e-10) throw NumericError("residue_simple: multiple pole, use contour residue", std::abs(d));
    return 1.0 / d;
}

// (1/2 pi i) closed-circle integral via the trapezoid rule (spectrally accurate on circles).
template <class F>
cplx contour_residue(F&& f, cplx center, double radius = 1e-4, int nodes = 256) {
    cplx acc = 0.0;
    for (int j = 0; j < nodes; ++j) {
        const cplx e = std::polar(radius, 2.0 * std::numbers::pi * (j + 0.5) / nodes);
        acc += f(center + e) * e;
    }
    return acc / double(nodes);
}

inline cplx residue_contour(const DirichletPoly& poly, cplx omega, double radius = 1e-4, int nodes = 256) {
    return contour_residue([&](cplx s) { return 1.0 / poly(s); }, omega, radius, nodes);
}

namespace detail {

inline bool newton_polish(const DirichletPoly& poly, cplx& s, int max_iter = 50) {
    for (int i = 0; i < max_iter; ++i) {
        const cplx d = poly.derivative(s);
        if (std::abs(d) == 0.0) break;
        const cplx step = poly(s) / d;
        s -= step;
        if (std::abs(step) < 1e-15 * (1.0 + std::abs(s))) break;
    }
    return std::abs(poly(s)) < kPoleTol;
}

inline Pole make_pole(const DirichletPoly& poly, cplx w, int mult) {
    Pole p{w, 0.0, mult};
    if (mult == 1 && std::abs(poly.derivative(w)) > 1e-10) {
        p.residue = 1.0 / poly.derivative(w);
    } else {
        p.residue = residue_contour(poly, w);
    }
    return p;
}

inline void sort_poles(std::vector<Pole>& v) {
    std::sort(v.begin(), v.end(), [](const Pole& a, const Pole& b) {
        if (a.omega.imag() != b.omega.imag()) return a.omega.imag() < b.omega.imag();
        return a.omega.real() < b.omega.real();
    });
}

}  // namespace detail

inline DirichletPoly lattice_poly(const LatticeStructure& s) {
    std::vector<RatioEntry> e;
    for (auto x : s.exponents) e.push_back({std::pow(s.generator, x.k), x.multiplicity});
    return DirichletPoly(RatioMultiset(std::move(e)));
}

// Roots z_j of 1 - sum m_j z^{k_j}; omega = (log z_j + 2 pi i m)/log lambda0.
inline ComplexDimensionSet lattice_poles(const LatticeStructure& s, double im_max, const DirichletPoly* poly_in = nullptr) {
    if (!(im_max > 0.0)) throw DomainError("lattice_poles: im_max must be positive");
    int deg = 0;
    for (auto x : s.exponents) deg = std::max(deg, x.k);
    std::vector<double> c(deg + 1, 0.0);  // c[j] z^j
    c[0] = 1.0;
    for (auto x : s.exponents) c[x.k] -= x.multiplicity;
    const double lead = c[deg];
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
    for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -c[i] / lead;
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
    if (es.info() != Eigen::Success) throw NumericError("companion eigenvalue solve failed", 0.0);

    const DirichletPoly poly = poly_in ? *poly_in : lattice_poly(s);
    auto pz = [&](cplx z) {
        cplx v = 0.0;
        for (int j = deg; j >= 0; --j) v = v * z + c[j];
        return v;
    };
    auto dpz = [&](cplx z) {
        cplx v = 0.0;
        for (int j = deg; j >= 1; --j) v = v * z + double(j) * c[j];
        return v;
    };

    const double L = std::log(s.generator);
    ComplexDimensionSet out;
    out.lattice = s;
    out.window = {1e300, -1e300, im_max};
    for (int j = 0; j < deg; ++j) {
        cplx z = es.eigenvalues()[j];
        for (int it = 0; it < 20; ++it) {
            const cplx d = dpz(z);
            if (std::abs(d) == 0.0) break;
            const cplx step = pz(z) / d;
            z -= step;
            if (std::abs(step) < 1e-16 * std::abs(z)) break;
        }
        const cplx lz = std::log(z);
        const double re = lz.real() / L;
        // Im omega = (arg z + 2 pi m)/L with L < 0
        const double period = 2.0 * std::numbers::pi / std::abs(L);
        const double base = lz.imag() / L;
        const long long mlo = static_cast<long long>(std::ceil((-im_max - base) / period - 1e-12));
        const long long mhi = static_cast<long long>(std::floor((im_max - base) / period + 1e-12));
        for (long long m = mlo; m <= mhi; ++m) {
            cplx w(re, base + period * double(m));
            if (std::abs(w.imag()) > im_max) continue;
            // keep the closed form (exact spacing) unless it misses the tolerance
            if (std::abs(poly(w)) >= kPoleTol) {
                cplx polished = w;
                if (!detail::newton_polish(poly, polished) || std::abs(polished - w) > 1e-6) {
                    throw NumericError("lattice pole failed verification", std::abs(poly(w)));
                }
                w = polished;
            }
            out.poles.push_back(detail::make_pole(poly, w, 1));
            out.window.re_min = std::min(out.window.re_min, re);
            out.window.re_max = std::max(out.window.re_max, re);
        }
    }
    detail::sort_poles(out.poles);
    if (out.poles.empty()) out.window.re_min = out.window.re_max = 0.0;
    return out;
}

namespace detail {

struct Rect {
    double x0, x1, y0, y1;
};

struct EdgeHit {};

// (1/2 pi i) contour integral of P'/P around r; throws EdgeHit if P nearly vanishes on the edge.
inline cplx winding_integral(const DirichletPoly& poly, const Rect& r, double tol) {
    auto g = [&](cplx s) {
        const cplx p = poly(s);
        if (std::abs(p) < 1e-9 * poly.magnitude(s.real())) throw EdgeHit{};
        return poly.derivative(s) / p;
    };
    cplx total = 0.0;
    total += quad::adaptive_gk([&](double x) { return g(cplx(x, r.y0)); }, r.x0, r.x1, tol);
    total += cplx(0, 1) * quad::adaptive_gk([&](double y) { return g(cplx(r.x1, y)); }, r.y0, r.y1, tol);
    total -= quad::adaptive_gk([&](double x) { return g(cplx(x, r.y1)); }, r.x0, r.x1, tol);
    total -= cplx(0, 1) * quad::adaptive_gk([&](double y) { return g(cplx(r.x0, y)); }, r.y0, r.y1, tol);
    return total / cplx(0.0, 2.0 * std::numbers::pi);
}

// Winding count or nullopt if the edge grazes a zero or the value is not near an integer.
inline std::optional<int> winding_count(const DirichletPoly& poly, const Rect& r) {
    try {
        const cplx w = winding_integral(poly, r, 1e-4);
        const double n = std::round(w.real());
        if (std::abs(w.real() - n) > 0.25 || std::abs(w.imag()) > 0.25) return std::nullopt;
        return static_cast<int>(n);
    } catch (const EdgeHit&) {
        return std::nullopt;
    } catch (const NumericError&) {
        return std::nullopt;
    }
}

inline void locate(const DirichletPoly& poly, const Rect& r, int count, std::vector<Pole>& out, int depth) {
    if (count <= 0) return;
    const double w = r.x1 - r.x0, h = r.y1 - r.y0;
    const cplx center(0.5 * (r.x0 + r.x1), 0.5 * (r.y0 + r.y1));
    if (count == 1 || std::max(w, h) < 1e-7 || depth > 200) {
        cplx s = center;
        const bool ok = newton_polish(poly, s);
        const double slack = 1e-9;
        const bool inside = s.real() >= r.x0 - slack && s.real() <= r.x1 + slack && s.imag() >= r.y0 - slack &&
                            s.imag() <= r.y1 + slack;
        if (ok && inside && (count == 1 || std::max(w, h) < 1e-7)) {
            out.push_back(make_pole(poly, s, count));
            return;
        }
        if (depth > 200) throw ContourError("subdivision depth exhausted with " + std::to_string(count) + " zeros left");
    }
    // Split the longer side at an off-centre fraction; retry other fractions on edge hits.
    static constexpr double kFractions[] = {0.4921, 0.5377, 0.4613, 0.5719, 0.4297, 0.6133};
    for (double f : kFractions) {
        Rect a = r, b = r;
        if (h >= w) {
            a.y1 = b.y0 = r.y0 + f * h;
        } else {
            a.x1 = b.x0 = r.x0 + f * w;
        }
        auto ca = winding_count(poly, a);
        auto cb = winding_count(poly, b);
        if (!ca || !cb || *ca < 0 || *cb < 0 || *ca + *cb != count) continue;
        locate(poly, a, *ca, out, depth + 1);
        locate(poly, b, *cb, out, depth + 1);
        return;
    }
    throw ContourError("could not split rectangle [" + std::to_string(r.x0) + "," + std::to_string(r.x1) + "]x[" +
                       std::to_string(r.y0) + "," + std::to_string(r.y1) + "] consistently");
}

}  // namespace detail

inline ComplexDimensionSet nonlattice_poles(const DirichletPoly& poly, std::pair<double, double> re_band, double im_max) {
    if (!(im_max > 0.0)) throw DomainError("nonlattice_poles: im_max must be positive");
    if (!(re_band.first < re_band.second)) throw DomainError("nonlattice_poles: empty real band");
    ComplexDimensionSet out;
    out.window = {re_band.first, re_band.second, im_max};
    // Perturb the outer rectangle outward if a zero sits on its boundary.
    for (int attempt = 0; attempt < 8; ++attempt) {
        const double eps = attempt * 1.37e-3;
        detail::Rect r{re_band.first - eps, re_band.second + eps, -im_max - 0.71 * eps, im_max + 0.53 * eps};
        auto n = detail::winding_count(poly, r);
        if (!n) continue;
        detail::locate(poly, r, *n, out.poles, 0);
        // drop anything outside the requested window (from the perturbation)
        std::erase_if(out.poles, [&](const Pole& p) {
            return p.omega.real() < re_band.first || p.omega.real() > re_band.second ||
                   std::abs(p.omega.imag()) > im_max;
        });
        detail::sort_poles(out.poles);
        return out;
    }
    throw ContourError("outer rectangle winding count could not be established");
}

// Lower bound for |P(sigma + i tau)| valid for sigma < D_l.
inline double screen_lower_bound(const DirichletPoly& poly, double sigma) {
    const auto& r = poly.ratios();
    if (!(sigma < lower_similarity_dimension(r))) throw DomainError("screen_lower_bound: sigma must be below D_l");
    const auto last = r.entries().back();
    return last.multiplicity * std::pow(last.ratio, sigma) * (1.0 - lower_poly(r, sigma));
}

inline ComplexDimensionSet rescale(const ComplexDimensionSet& set, double alpha) {
    if (!(alpha > 0.0)) throw DomainError("rescale: alpha must be positive");
    ComplexDimensionSet out = set;
    for (auto& p : out.poles) {
        p.omega /= alpha;
        p.residue /= alpha;
    }
    out.window = {set.window.re_min / alpha, set.window.re_max / alpha, set.window.im_max / alpha};
    out.alpha = set.alpha * alpha;
    return out;
}

inline nlohmann::json to_json(const ComplexDimensionSet& set) {
    nlohmann::json poles = nlohmann::json::array();
    for (const auto& p : set.poles) {
        poles.push_back({{"re", p.omega.real()},
                         {"im", p.omega.imag()},
                         {"res_re", p.residue.real()},
                         {"res_im", p.residue.imag()},
                         {"mult", p.multiplicity}});
    }
    nlohmann::json j{{"poles", poles},
                     {"window", {{"re_min", set.window.re_min}, {"re_max", set.window.re_max}, {"im_max", set.window.im_max}}},
                     {"alpha", set.alpha}};
    if (set.lattice) {
        nlohmann::json ex = nlohmann::json::array();
        for (auto e : set.lattice->exponents) ex.push_back({{"k", e.k}, {"mult", e.multiplicity}});
        j["lattice"] = {{"generator", set.lattice->generator}, {"exponents", ex}};
    } else {
        j["lattice"] = nullptr;
    }
    return j;
}

}  // namespace fractal_dims

#endif  // FRACTAL_DIMS_ZETA_HPP

#ifndef FRACTAL_DIMS_HEAT_HPP
#define FRACTAL_DIMS_HEAT_HPP

// Heat inflow into a polygon (u = 0 at t = 0, u = 1 on the boundary): implicit Euler on a
// masked cell-centred grid, heat content, a Brownian-path cross-check, the 2-scaling law,
// decomposition remainders and exponent fits.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/SparseCholesky>
#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "geometry.hpp"
#include "sampled.hpp"
#include "tube.hpp"
#include "vonkoch.hpp"
#include "zeta.hpp"

namespace fractal_dims {

struct HeatProblem {
    RegionPolygon region;
    double diffusivity = 1.0;
};

enum CellKind : std::uint8_t { kOutside = 0, kInterior = 1, kBoundaryAdjacent = 2 };

struct HeatField {
    double xmin = 0, ymin = 0, h = 0;
    int nx = 0, ny = 0;
    std::vector<std::uint8_t> mask;      // CellKind per cell, row-major
    std::vector<double> times;
    std::vector<double> content;         // h^2 sum u, per saved time
    std::vector<std::vector<double>> u;  // full grid per saved time, if kept
    nlohmann::json meta = nlohmann::json::object();
};

struct HeatOptions {
    double growth = 0.05;  // steps grow geometrically: dt_n = max(dt, growth * t_n)
    double cg_tol = 1e-10;
    int cg_max_iter = 400;
    bool keep_fields = true;
    double theta_min = 1e-3;  // smallest admitted boundary-crossing fraction
    std::size_t max_cells = 60'000'000;
};

namespace detail {

// Grid level of the preconditioner; arrays are nx*ny with an inactive border ring.
struct MgLevel {
    int nx = 0, ny = 0;
    std::vector<std::uint8_t> active;
    std::vector<double> mass, lap, wE, wN;  // operator = shift*mass + lap - couplings
    std::vector<double> diag, inv_diag, x, b, r;
    std::size_t n_active = 0;

    void resize(int nx_, int ny_) {
        nx = nx_;
        ny = ny_;
        const std::size_t n = std::size_t(nx) * ny;
        active.assign(n, 0);
        for (auto* v : {&mass, &lap, &wE, &wN, &diag, &inv_diag, &x, &b, &r}) v->assign(n, 0.0);
    }
};

// Aggregation V-cycle: 2x2 cell blocks, piecewise-constant transfer, Galerkin coarse
// operator with the diffusion part halved (the usual fix for unsmoothed aggregation),
// Gauss-Seidel forward before and backward after, exact sparse solve at the bottom.
class HeatMultigrid {
public:
    explicit HeatMultigrid(MgLevel fine, std::size_t coarse_limit = 4096) {
        levels_.push_back(std::move(fine));
        while (levels_.back().n_active > coarse_limit && levels_.back().nx > 6 && levels_.back().ny > 6)
            levels_.push_back(coarsen(levels_.back()));
        const MgLevel& c = levels_.back();
        cidx_.assign(c.active.size(), -1);
        int m = 0;
        for (std::size_t k = 0; k < c.active.size(); ++k)
            if (c.active[k]) cidx_[k] = m++;
        ncoarse_ = m;
    }

    std::size_t depth() const { return levels_.size(); }
    const MgLevel& fine() const { return levels_.front(); }

    void set_shift(double s) {
        for (auto& L : levels_)
            for (std::size_t k = 0; k < L.active.size(); ++k) {
                L.diag[k] = L.active[k] ? s * L.mass[k] + L.lap[k] : 1.0;
                L.inv_diag[k] = L.active[k] ? 1.0 / L.diag[k] : 0.0;
            }
        factor_coarsest();
    }

    void multiply(const std::vector<double>& x, std::vector<double>& y) const { apply_op(levels_.front(), x, y); }

    void precondition(const std::vector<double>& r, std::vector<double>& z) {
        levels_.front().b = r;
        vcycle(0);
        z = levels_.front().x;
    }

private:
    static void apply_op(const MgLevel& L, const std::vector<double>& x, std::vector<double>& y) {
        const int nx = L.nx;
        y.assign(x.size(), 0.0);
        for (int j = 1; j < L.ny - 1; ++j)
            for (int i = 1; i < nx - 1; ++i) {
                const std::size_t k = std::size_t(j) * nx + i;
                if (!L.active[k]) continue;
                y[k] = L.diag[k] * x[k] - L.wE[k] * x[k + 1] - L.wE[k - 1] * x[k - 1] - L.wN[k] * x[k + nx] -
                       L.wN[k - nx] * x[k - nx];
            }
    }

    // one colour of red-black Gauss-Seidel; colour = (i + j) & 1
    static void relax_colour(MgLevel& L, int colour) {
        const std::size_t nx = L.nx;
        const double* wE = L.wE.data();
        const double* wN = L.wN.data();
        const double* b = L.b.data();
        const double* id = L.inv_diag.data();
        double* x = L.x.data();
        for (int j = 1; j < L.ny - 1; ++j) {
            const std::size_t row = std::size_t(j) * nx;
            for (int i = 1 + ((j + 1 + colour) & 1); i < L.nx - 1; i += 2) {
                const std::size_t k = row + i;
                // inactive cells have inv_diag = 0 and stay at zero
                x[k] = (b[k] + wE[k] * x[k + 1] + wE[k - 1] * x[k - 1] + wN[k] * x[k + nx] + wN[k - nx] * x[k - nx]) * id[k];
            }
        }
    }

    // forward = red then black; backward is its adjoint
    static void smooth(MgLevel& L, bool forward, int sweeps) {
        for (int s = 0; s < sweeps; ++s) {
            relax_colour(L, forward ? 0 : 1);
            relax_colour(L, forward ? 1 : 0);
        }
    }

    static MgLevel coarsen(const MgLevel& f) {
        MgLevel c;
        c.resize((f.nx - 1) / 2 + 2, (f.ny - 1) / 2 + 2);
        for (int j = 1; j < f.ny - 1; ++j)
            for (int i = 1; i < f.nx - 1; ++i) {
                const std::size_t k = std::size_t(j) * f.nx + i;
                if (!f.active[k]) continue;
                const int I = (i + 1) / 2, J = (j + 1) / 2;
                const std::size_t K = std::size_t(J) * c.nx + I;
                c.active[K] = 1;
                c.mass[K] += f.mass[k];
                c.lap[K] += f.lap[k];
                if (f.wE[k] != 0.0) {
                    if ((i + 2) / 2 == I) c.lap[K] -= 2 * f.wE[k];
                    else c.wE[K] += f.wE[k];
                }
                if (f.wN[k] != 0.0) {
                    if ((j + 2) / 2 == J) c.lap[K] -= 2 * f.wN[k];
                    else c.wN[K] += f.wN[k];
                }
            }
        for (std::size_t K = 0; K < c.active.size(); ++K) {
            c.lap[K] *= 0.5;
            c.wE[K] *= 0.5;
            c.wN[K] *= 0.5;
            c.n_active += c.active[K];
        }
        return c;
    }

    void factor_coarsest() {
        const MgLevel& c = levels_.back();
        std::vector<Eigen::Triplet<double>> trip;
        for (std::size_t k = 0; k < c.active.size(); ++k) {
            if (!c.active[k]) continue;
            const int a = cidx_[k];
            trip.emplace_back(a, a, c.diag[k]);
            if (c.wE[k] != 0.0) {
                trip.emplace_back(a, cidx_[k + 1], -c.wE[k]);
                trip.emplace_back(cidx_[k + 1], a, -c.wE[k]);
            }
            if (c.wN[k] != 0.0) {
                trip.emplace_back(a, cidx_[k + c.nx], -c.wN[k]);
                trip.emplace_back(cidx_[k + c.nx], a, -c.wN[k]);
            }
        }
        Eigen::SparseMatrix<double> A(ncoarse_, ncoarse_);
        A.setFromTriplets(trip.begin(), trip.end());
        if (!analyzed_) {
            ldlt_.analyzePattern(A);
            analyzed_ = true;
        }
        ldlt_.factorize(A);
        if (ldlt_.info() != Eigen::Success) throw NumericError("heat multigrid: coarse factorization failed", 0.0);
    }

    void vcycle(std::size_t l) {
        MgLevel& L = levels_[l];
        std::fill(L.x.begin(), L.x.end(), 0.0);
        if (l + 1 == levels_.size()) {
            Eigen::VectorXd rhs(ncoarse_);
            for (std::size_t k = 0; k < L.active.size(); ++k)
                if (L.active[k]) rhs[cidx_[k]] = L.b[k];
            const Eigen::VectorXd sol = ldlt_.solve(rhs);
            for (std::size_t k = 0; k < L.active.size(); ++k)
                if (L.active[k]) L.x[k] = sol[cidx_[k]];
            return;
        }
        smooth(L, true, 1);
        apply_op(L, L.x, L.r);
        MgLevel& C = levels_[l + 1];
        std::fill(C.b.begin(), C.b.end(), 0.0);
        for (int j = 1; j < L.ny - 1; ++j) {
            const std::size_t row = std::size_t(j) * L.nx, crow = std::size_t((j + 1) / 2) * C.nx;
            for (int i = 1; i < L.nx - 1; ++i)
                if (L.active[row + i]) C.b[crow + (i + 1) / 2] += L.b[row + i] - L.r[row + i];
        }
        vcycle(l + 1);
        for (int j = 1; j < L.ny - 1; ++j) {
            const std::size_t row = std::size_t(j) * L.nx, crow = std::size_t((j + 1) / 2) * C.nx;
            for (int i = 1; i < L.nx - 1; ++i)
                if (L.active[row + i]) L.x[row + i] += C.x[crow + (i + 1) / 2];
        }
        smooth(L, false, 1);
    }

    std::vector<MgLevel> levels_;
    std::vector<int> cidx_;
    int ncoarse_ = 0;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
    bool analyzed_ = false;
};

struct CgStats {
    int iterations = 0;
    double residual = 0.0;
};

// Preconditioned CG from the initial guess in x; stops at |r| <= tol |b|.
inline CgStats pcg(HeatMultigrid& mg, const std::vector<double>& b, std::vector<double>& x, double tol, int max_iter) {
    auto dotp = [](const std::vector<double>& a, const std::vector<double>& c) {
        double s = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * c[k];
        return s;
    };
    const double bn = std::sqrt(dotp(b, b));
    CgStats st;
    if (bn == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        return st;
    }
    std::vector<double> r(b.size()), z, p, q;
    mg.multiply(x, q);
    for (std::size_t k = 0; k < b.size(); ++k) r[k] = b[k] - q[k];
    double rn = std::sqrt(dotp(r, r));
    if (rn <= tol * bn) {
        st.residual = rn / bn;
        return st;
    }
    mg.precondition(r, z);
    p = z;
    double rz = dotp(r, z);
    for (int it = 1; it <= max_iter; ++it) {
        mg.multiply(p, q);
        const double a = rz / dotp(p, q);
        for (std::size_t k = 0; k < b.size(); ++k) {
            x[k] += a * p[k];
            r[k] -= a * q[k];
        }
        rn = std::sqrt(dotp(r, r));
        st.iterations = it;
        st.residual = rn / bn;
        if (rn <= tol * bn) return st;
        mg.precondition(r, z);
        const double rz2 = dotp(r, z);
        const double beta = rz2 / rz;
        rz = rz2;
        for (std::size_t k = 0; k < b.size(); ++k) p[k] = z[k] + beta * p[k];
    }
    throw NumericError("heat CG did not converge in " + std::to_string(max_iter) + " iterations", st.residual);
}

// Fraction along p -> q at which the segment first meets the boundary (1 if it does not).
inline double crossing_fraction(const SegmentIndex& idx, Vec2 p, Vec2 q, std::vector<int>& scratch) {
    BBox box;
    box.expand(p);
    box.expand(q);
    idx.collect(box, 0.0, scratch);
    const Vec2 d = q - p;
    double best = 1.0;
    for (int s : scratch) {
        const Vec2 a = idx.seg(s).a, e = idx.seg(s).b - idx.seg(s).a;
        const double den = cross(d, e);
        if (std::abs(den) < 1e-300) continue;
        const double tp = cross(a - p, e) / den, te = cross(a - p, d) / den;
        if (tp >= 0.0 && tp <= 1.0 && te >= 0.0 && te <= 1.0) best = std::min(best, tp);
    }
    return best;
}

}  // namespace detail

// Backward Euler, 5-point Laplacian. A cell whose neighbour centre lies outside sees the
// boundary value 1 at the true crossing point theta*h: diag += C/(theta h^2), rhs += C/(theta h^2).
// This keeps the matrix a symmetric M-matrix, so 0 <= u <= 1 and u grows in t.
inline HeatField solve_heat_fdm(const HeatProblem& pb, double h, double dt, double t_end, std::vector<double> save_times,
                                const HeatOptions& opt = {}) {
    if (!(h > 0.0) || !(dt > 0.0)) throw DomainError("solve_heat_fdm: h and dt must be positive");
    if (!(pb.diffusivity > 0.0)) throw DomainError("solve_heat_fdm: diffusivity must be positive");
    if (pb.region.vertices.size() < 3 || !(pb.region.area() > 0.0)) throw DomainError("solve_heat_fdm: degenerate region");
    if (save_times.empty()) throw DomainError("solve_heat_fdm: no save times");
    std::sort(save_times.begin(), save_times.end());
    save_times.erase(std::unique(save_times.begin(), save_times.end()), save_times.end());
    if (!(save_times.front() > 0.0)) throw DomainError("solve_heat_fdm: save times must be positive");
    if (save_times.back() > t_end * (1 + 1e-12)) throw DomainError("solve_heat_fdm: save time beyond t_end");

    const BBox bb = pb.region.bbox();
    HeatField F;
    F.h = h;
    F.xmin = bb.xmin - 2 * h;
    F.ymin = bb.ymin - 2 * h;
    F.nx = int(std::ceil(bb.width() / h)) + 4;
    F.ny = int(std::ceil(bb.height() / h)) + 4;
    const std::size_t N = std::size_t(F.nx) * F.ny;
    if (double(F.nx) * F.ny > double(opt.max_cells))
        throw SizeLimitError("heat grid " + std::to_string(F.nx) + "x" + std::to_string(F.ny) + " exceeds cap");
    F.mask = inside_mask(pb.region, F.xmin, F.ymin, h, F.nx, F.ny);

    detail::MgLevel fine;
    fine.resize(F.nx, F.ny);
    std::vector<double> g(N, 0.0);
    const SegmentIndex idx(pb.region.boundary());
    std::vector<int> scratch;
    const double c = pb.diffusivity / (h * h);
    const int nx = F.nx;
    std::size_t n_in = 0;
    for (int j = 1; j < F.ny - 1; ++j)
        for (int i = 1; i < nx - 1; ++i) {
            const std::size_t k = std::size_t(j) * nx + i;
            if (!F.mask[k]) continue;
            ++n_in;
            fine.active[k] = 1;
            fine.mass[k] = 1.0;
            const Vec2 p = {F.xmin + (i + 0.5) * h, F.ymin + (j + 0.5) * h};
            const std::size_t nb[4] = {k + 1, k - 1, k + nx, k - nx};
            const Vec2 dir[4] = {{h, 0}, {-h, 0}, {0, h}, {0, -h}};
            for (int d = 0; d < 4; ++d) {
                if (F.mask[nb[d]]) {
                    fine.lap[k] += c;
                    if (d == 0) fine.wE[k] = c;
                    if (d == 2) fine.wN[k] = c;
                } else {
                    const double th = std::max(opt.theta_min, detail::crossing_fraction(idx, p, p + dir[d], scratch));
                    fine.lap[k] += c / th;
                    g[k] += c / th;
                    F.mask[k] = kBoundaryAdjacent;
                }
            }
        }
    // the padding ring is outside by construction; drop anything the scanline put there
    for (int i = 0; i < nx; ++i) F.mask[i] = F.mask[N - nx + i] = 0;
    for (int j = 0; j < F.ny; ++j) F.mask[std::size_t(j) * nx] = F.mask[std::size_t(j) * nx + nx - 1] = 0;
    if (n_in == 0) throw ResolutionError("solve_heat_fdm: no cell centre inside the region at h = " + std::to_string(h));
    fine.n_active = n_in;

    detail::HeatMultigrid mg(std::move(fine));
    std::vector<double> u(N, 0.0), rhs(N, 0.0), du(N, 0.0);
    double t = 0.0, shift = -1.0, prev_step = 0.0;
    std::size_t next = 0;
    long steps = 0, iters = 0;
    int max_iters = 0;
    double worst_res = 0.0, umin = 0.0, umax = 0.0;
    const auto& act = mg.fine().active;
    while (next < save_times.size()) {
        const double target = save_times[next];
        const double remaining = target - t;
        double step = std::max(dt, opt.growth * t);
        bool land = false;
        if (step >= remaining * (1 - 1e-9)) {
            step = remaining;
            land = true;
        } else if (step > 0.5 * remaining) {
            step = 0.5 * remaining;  // two even steps rather than a sliver
        }
        const double s = 1.0 / step;
        if (s != shift) {
            mg.set_shift(s);
            shift = s;
        }
        // start CG from the linear extrapolation of the last two steps
        const double w = prev_step > 0.0 ? step / prev_step : 0.0;
        for (std::size_t k = 0; k < N; ++k) {
            rhs[k] = act[k] ? s * u[k] + g[k] : 0.0;
            const double un = u[k];
            u[k] += w * du[k];
            du[k] = un;
        }
        const auto st = detail::pcg(mg, rhs, u, opt.cg_tol, opt.cg_max_iter);
        for (std::size_t k = 0; k < N; ++k) du[k] = u[k] - du[k];
        prev_step = step;
        ++steps;
        iters += st.iterations;
        max_iters = std::max(max_iters, st.iterations);
        worst_res = std::max(worst_res, st.residual);
        t = land ? target : t + step;
        if (land) {
            double sum = 0.0;
            for (std::size_t k = 0; k < N; ++k) {
                if (!act[k]) continue;
                sum += u[k];
                umin = std::min(umin, u[k]);
                umax = std::max(umax, u[k]);
            }
            F.times.push_back(t);
            F.content.push_back(h * h * sum);
            if (opt.keep_fields) F.u.push_back(u);
            ++next;
        }
    }
    F.meta = {{"kind", "heat_content"}, {"h", h},         {"dt", dt},           {"growth", opt.growth},
              {"steps", steps},         {"cg_iterations", iters}, {"cg_max_iterations", max_iters},
              {"cg_worst_residual", worst_res}, {"mg_levels", mg.depth()}, {"cells", n_in},
              {"cell_area", h * h * double(n_in)}, {"area", pb.region.area()}, {"perimeter", pb.region.perimeter()},
              {"diffusivity", pb.diffusivity}, {"u_min", umin},   {"u_max", umax}};
    return F;
}

inline SampledFunction heat_content(const HeatField& f) { return SampledFunction(f.times, f.content, f.meta); }

// ---------------------------------------------------------------------------------------------
// Brownian-path cross-check: dX = sqrt(2C) dW from uniform starts; E(t) = area * P(exit <= t).
// Between steps, a path that stays inside still exits with the half-plane bridge probability
// exp(-d0 d1 / (C dt)).

struct MonteCarloOptions {
    std::size_t paths = 200'000;
    double growth = 0.01;  // step <= growth * t after the first save time
    int first_steps = 100;  // uniform steps up to the first save time
    std::uint64_t seed = 20240611;
    unsigned workers = 0;  // 0 -> hardware concurrency
};

struct MonteCarloContent {
    std::vector<double> ts, content, sigma;
    nlohmann::json meta = nlohmann::json::object();
};

inline MonteCarloContent monte_carlo_content(const HeatProblem& pb, std::vector<double> ts, const MonteCarloOptions& opt = {}) {
    if (ts.empty()) throw DomainError("monte_carlo_content: no times");
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    if (!(ts.front() > 0.0)) throw DomainError("monte_carlo_content: times must be positive");
    if (opt.paths == 0 || opt.first_steps < 1 || !(opt.growth > 0.0)) throw DomainError("monte_carlo_content: bad options");

    // shared time grid through every requested t
    std::vector<double> T{0.0};
    std::vector<std::size_t> at;
    for (int i = 1; i <= opt.first_steps; ++i) T.push_back(ts.front() * i / opt.first_steps);
    at.push_back(T.size() - 1);
    for (std::size_t k = 1; k < ts.size(); ++k) {
        const int m = std::max(1, int(std::ceil(std::log(ts[k] / ts[k - 1]) / opt.growth)));
        for (int i = 1; i <= m; ++i) T.push_back(ts[k - 1] * std::pow(ts[k] / ts[k - 1], double(i) / m));
        T.back() = ts[k];
        at.push_back(T.size() - 1);
    }

    const double C = pb.diffusivity;
    const SegmentIndex idx(pb.region.boundary());
    const BBox bb = pb.region.bbox();
    const double far = 12.0 * std::sqrt(C * ts.back());
    unsigned W = opt.workers ? opt.workers : std::max(1u, std::thread::hardware_concurrency());
    W = unsigned(std::min<std::size_t>(W, opt.paths));

    // exit step index per path, per worker; T.size() means no exit
    std::vector<std::vector<std::size_t>> hist(W, std::vector<std::size_t>(T.size() + 1, 0));
    auto work = [&](unsigned w) {
        std::seed_seq sq{std::uint64_t(opt.seed), std::uint64_t(w)};
        std::mt19937_64 rng(sq);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        std::normal_distribution<double> G(0.0, 1.0);
        std::vector<int> scratch;
        const std::size_t n0 = opt.paths * w / W, n1 = opt.paths * (w + 1) / W;
        for (std::size_t n = n0; n < n1; ++n) {
            Vec2 x;
            do {
                x = {bb.xmin + U(rng) * bb.width(), bb.ymin + U(rng) * bb.height()};
            } while (!pb.region.contains(x));
            double d = idx.nearest(x);
            std::size_t exit = T.size();
            if (d < far) {
                for (std::size_t s = 0; s + 1 < T.size(); ++s) {
                    const double dts = T[s + 1] - T[s], sd = std::sqrt(2 * C * dts);
                    const Vec2 y = {x.x + sd * G(rng), x.y + sd * G(rng)};
                    bool out = false;
                    if (distance(x, y) >= d) out = detail::crossing_fraction(idx, x, y, scratch) < 1.0;
                    const double dy = out ? 0.0 : idx.nearest(y);
                    if (!out && U(rng) < std::exp(-d * dy / (C * dts))) out = true;
                    if (out) {
                        exit = s + 1;
                        break;
                    }
                    x = y;
                    d = dy;
                }
            }
            ++hist[w][exit];
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < W; ++w) pool.emplace_back(work, w);
    work(0);
    for (auto& th : pool) th.join();

    std::vector<std::size_t> total(T.size() + 1, 0);
    for (const auto& hw : hist)
        for (std::size_t s = 0; s < total.size(); ++s) total[s] += hw[s];
    MonteCarloContent out;
    out.ts = ts;
    const double area = pb.region.area(), n = double(opt.paths);
    for (std::size_t k = 0; k < ts.size(); ++k) {
        double cnt = 0;
        for (std::size_t s = 1; s <= at[k]; ++s) cnt += double(total[s]);
        const double p = cnt / n;
        out.content.push_back(area * p);
        out.sigma.push_back(area * std::sqrt(std::max(p * (1 - p), 1.0 / n) / n));
    }
    out.meta = {{"kind", "heat_content_mc"}, {"paths", opt.paths}, {"seed", opt.seed}, {"workers", W},
                {"time_steps", T.size() - 1}, {"area", area}};
    return out;
}

// ---------------------------------------------------------------------------------------------

inline RegionPolygon transform_region(const RegionPolygon& r, double lambda, double rotation) {
    RegionPolygon o;
    for (Vec2 p : r.vertices) o.vertices.push_back(rotate(p, rotation) * lambda);
    return o;
}

struct HeatScalingReport {
    std::vector<double> ts, lhs, rhs, deviation;  // lhs = E_{lambda Omega}(t), rhs = lambda^2 E_Omega(t/lambda^2)
    double max_rel_dev = 0.0;
    double tol = 0.0;
    bool pass = false;
};

// Independent solves on Omega and on its image, both at grid spacing h.
inline HeatScalingReport verify_heat_scaling(const HeatProblem& pb, double lambda, const std::vector<double>& ts, double h,
                                             double rotation = 0.0, double tol = 0.02, HeatOptions opt = {}) {
    if (!(lambda > 0.0)) throw DomainError("verify_heat_scaling: lambda must be positive");
    if (ts.empty()) throw DomainError("verify_heat_scaling: empty t list");
    const double tmin = *std::min_element(ts.begin(), ts.end());
    if (tmin < 25 * h * h || tmin / (lambda * lambda) < 25 * h * h)
        throw ResolutionError("verify_heat_scaling: t below 25 h^2");
    opt.keep_fields = false;
    HeatProblem sc{transform_region(pb.region, lambda, rotation), pb.diffusivity};
    std::vector<double> t0;
    for (double t : ts) t0.push_back(t / (lambda * lambda));
    const auto E0 = solve_heat_fdm(pb, h, h * h / 2, *std::max_element(t0.begin(), t0.end()), t0, opt);
    const auto E1 = solve_heat_fdm(sc, h, h * h / 2, *std::max_element(ts.begin(), ts.end()), ts, opt);
    const auto f0 = heat_content(E0), f1 = heat_content(E1);
    HeatScalingReport rep;
    rep.tol = tol;
    for (double t : ts) {
        const double l = f1(t), r = lambda * lambda * f0(t / (lambda * lambda));
        rep.ts.push_back(t);
        rep.lhs.push_back(l);
        rep.rhs.push_back(r);
        const double dev = std::abs(l - r) / std::max(std::abs(r), 1e-300);
        rep.deviation.push_back(dev);
        rep.max_rel_dev = std::max(rep.max_rel_dev, dev);
    }
    rep.pass = rep.max_rel_dev <= tol;
    return rep;
}

// R(t) = E(t) - sum m lambda^2 Eref(t / lambda^2); Eref = E for a self-similar decomposition.
inline SampledFunction decomposition_remainder(const SampledFunction& E, const SampledFunction& Eref, const RatioMultiset& ratios,
                                               const std::vector<double>& ts) {
    std::vector<double> v;
    for (double t : ts) {
        double acc = E(t);
        for (auto e : ratios.entries()) acc -= e.multiplicity * e.ratio * e.ratio * Eref(t / (e.ratio * e.ratio));
        v.push_back(acc);
    }
    return SampledFunction(ts, v, {{"kind", "decomposition_remainder"}});
}

struct RemainderReport {
    SampledFunction remainder;
    SampledFunction content;
    double C = 0.0;        // max |R|/t over the window
    double C_small = 0.0;  // max |R|/t over the lower half of the window (in log t)
    double C_large = 0.0;  // ... and over the upper half
    bool bounded = false;  // C_small <= 2 C_large: no growth of |R|/t toward t = 0
};

// Snowflake heat content decomposed by the curve system via the 2-scaling law.
inline RemainderReport decomposition_remainder(const GKCParams& p, int level, std::vector<double> ts, double h,
                                               HeatOptions opt = {}) {
    if (!(p.r < self_avoidance_bound(p.n))) throw DomainError("decomposition_remainder: r above the self-avoidance bound");
    if (ts.size() < 2) throw DomainError("decomposition_remainder: need at least two times");
    std::sort(ts.begin(), ts.end());
    if (ts.front() < 25 * h * h) throw ResolutionError("decomposition_remainder: t below 25 h^2");
    const auto rat = gkf_ratios(p);
    std::vector<double> save = ts;
    for (double t : ts)
        for (auto e : rat.entries()) save.push_back(t / (e.ratio * e.ratio));
    opt.keep_fields = false;
    const auto s = snowflake(p, level);
    const auto F = solve_heat_fdm({s.polygon(), 1.0}, h, h * h / 2, *std::max_element(save.begin(), save.end()), save, opt);
    RemainderReport rep;
    rep.content = heat_content(F);
    rep.remainder = decomposition_remainder(rep.content, rep.content, rat, ts);
    const double mid = std::sqrt(ts.front() * ts.back());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double q = std::abs(rep.remainder.vals[i]) / ts[i];
        rep.C = std::max(rep.C, q);
        double& side = ts[i] <= mid ? rep.C_small : rep.C_large;
        side = std::max(side, q);
    }
    rep.bounded = rep.C_small <= 2 * rep.C_large;
    rep.remainder.meta = {{"kind", "decomposition_remainder"}, {"C", rep.C}, {"C_small", rep.C_small},
                          {"C_large", rep.C_large}, {"bounded", rep.bounded}, {"h", h}, {"level", level}};
    return rep;
}

// ---------------------------------------------------------------------------------------------

struct ExponentFit {
    double p = 0.0, a = 0.0, b = 0.0;
    double rms = 0.0;  // relative
    std::size_t samples = 0;
};

// E ~ a t^p + b t over [tmin, tmax], least squares relative to E; p by scan + golden section.
inline ExponentFit heat_exponent_fit(const SampledFunction& E, double tmin, double tmax, bool bulk_term = true) {
    std::vector<double> t, y;
    for (std::size_t i = 0; i < E.size(); ++i)
        if (E.ts[i] >= tmin * (1 - 1e-12) && E.ts[i] <= tmax * (1 + 1e-12)) {
            if (!(E.vals[i] > 0.0)) throw FitError("heat_exponent_fit: nonpositive content in window");
            t.push_back(E.ts[i]);
            y.push_back(E.vals[i]);
        }
    if (t.size() < 8) throw FitError("heat_exponent_fit: fewer than 8 samples in window");
    // for fixed p the problem is linear in (a, b)
    auto solve = [&](double p, double& a, double& b) {
        double s11 = 0, s12 = 0, s22 = 0, r1 = 0, r2 = 0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double f1 = std::pow(t[i], p) / y[i], f2 = t[i] / y[i];
            s11 += f1 * f1;
            s12 += f1 * f2;
            s22 += f2 * f2;
            r1 += f1;
            r2 += f2;
        }
        if (bulk_term) {
            const double det = s11 * s22 - s12 * s12;
            if (!(std::abs(det) > 1e-14 * s11 * s22)) throw FitError("heat_exponent_fit: collinear basis");
            a = (r1 * s22 - r2 * s12) / det;
            b = (s11 * r2 - s12 * r1) / det;
        } else {
            a = r1 / s11;
            b = 0.0;
        }
        double ss = 0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double e = (a * std::pow(t[i], p) + b * t[i]) / y[i] - 1.0;
            ss += e * e;
        }
        return ss;
    };
    double a, b, best = std::numeric_limits<double>::infinity(), pbest = 0;
    const double lo = 0.02, hi = 0.9, stp = 0.005;
    for (double p = lo; p <= hi + 1e-12; p += stp) {
        const double v = solve(p, a, b);
        if (v < best) {
            best = v;
            pbest = p;
        }
    }
    double x0 = std::max(lo, pbest - stp), x3 = std::min(hi, pbest + stp);
    const double g = 0.5 * (std::sqrt(5.0) - 1);
    double x1 = x3 - g * (x3 - x0), x2 = x0 + g * (x3 - x0);
    double f1 = solve(x1, a, b), f2 = solve(x2, a, b);
    for (int it = 0; it < 200 && x3 - x0 > 1e-13; ++it) {
        if (f1 < f2) {
            x3 = x2;
            x2 = x1;
            f2 = f1;
            x1 = x3 - g * (x3 - x0);
            f1 = solve(x1, a, b);
        } else {
            x0 = x1;
            x1 = x2;
            f1 = f2;
            x2 = x0 + g * (x3 - x0);
            f2 = solve(x2, a, b);
        }
    }
    ExponentFit out;
    out.p = 0.5 * (x0 + x3);
    out.rms = std::sqrt(solve(out.p, out.a, out.b) / double(t.size()));
    out.samples = t.size();
    return out;
}

// 1-D oracles: interval [0, 1] held at 1, C = 1.
inline double interval_temperature(double x, double t, int terms = 4000) {
    double s = 0.0;
    for (int m = 1; m <= 2 * terms; m += 2) {
        const double e = std::exp(-m * m * std::numbers::pi * std::numbers::pi * t);
        if (e < 1e-18) break;
        s += 4.0 / (m * std::numbers::pi) * std::sin(m * std::numbers::pi * x) * e;
    }
    return 1.0 - s;
}

inline double interval_content(double t, int terms = 4000) {
    double s = 0.0;
    for (int m = 1; m <= 2 * terms; m += 2) {
        const double e = std::exp(-m * m * std::numbers::pi * std::numbers::pi * t);
        if (e < 1e-18) break;
        s += 8.0 / (m * m * std::numbers::pi * std::numbers::pi) * e;
    }
    return 1.0 - s;
}

// unit square: 1 - u = (1 - u_x)(1 - u_y)
inline double unit_square_content(double t) {
    const double e1 = interval_content(t);
    return 1.0 - (1.0 - e1) * (1.0 - e1);
}

}  // namespace fractal_dims

#endif  // FRACTAL_DIMS_HEAT_HPP

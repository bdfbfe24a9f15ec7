// fractal-dims: command-line driver with a hash-keyed result cache.

#include <openssl/evp.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fractal_dims/fractal_dims.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace fractal_dims;

namespace {

constexpr const char* kVersion = "0.1.0";

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("config: " + what) {}
};

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr)) throw Error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// config access

struct Cfg {
    json j;

    bool has(const std::string& k) const { return j.contains(k) && !j[k].is_null(); }

    // numbers, or "a/b" fractions
    double real(const std::string& k) const {
        if (!has(k)) throw ConfigError(k + ": missing");
        const auto& v = j[k];
        if (v.is_number()) return v.get<double>();
        if (v.is_string()) {
            const auto s = v.get<std::string>();
            try {
                const auto slash = s.find('/');
                if (slash == std::string::npos) return std::stod(s);
                return std::stod(s.substr(0, slash)) / std::stod(s.substr(slash + 1));
            } catch (const std::exception&) {
            }
        }
        throw ConfigError(k + ": expected a number, got " + v.dump());
    }
    double real(const std::string& k, double fallback) const { return has(k) ? real(k) : fallback; }

    double positive(const std::string& k) const {
        const double v = real(k);
        if (!(v > 0) || !std::isfinite(v)) throw ConfigError(k + ": must be positive");
        return v;
    }

    int integer(const std::string& k, int lo, int hi) const {
        if (!has(k) || !j[k].is_number_integer()) throw ConfigError(k + ": expected an integer");
        const int v = j[k].get<int>();
        if (v < lo || v > hi) throw ConfigError(k + ": must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        return v;
    }

    std::string str(const std::string& k, std::initializer_list<const char*> allowed) const {
        if (!has(k) || !j[k].is_string()) throw ConfigError(k + ": expected a string");
        const auto s = j[k].get<std::string>();
        for (const char* a : allowed)
            if (s == a) return s;
        std::string list;
        for (const char* a : allowed) list += std::string(list.empty() ? "" : "|") + a;
        throw ConfigError(k + ": must be one of " + list);
    }

    bool flag(const std::string& k) const {
        if (!has(k) || !j[k].is_boolean()) throw ConfigError(k + ": expected true/false");
        return j[k].get<bool>();
    }

    std::vector<double> reals(const std::string& k) const {
        if (!has(k) || !j[k].is_array() || j[k].empty()) throw ConfigError(k + ": expected a non-empty array");
        std::vector<double> v;
        for (const auto& x : j[k]) {
            if (!x.is_number()) throw ConfigError(k + ": array entries must be numbers");
            v.push_back(x.get<double>());
        }
        return v;
    }

    GKCParams gkc() const {
        const int n = integer("n", 3, 1000);
        try {
            return GKCParams(n, real("r"));
        } catch (const DomainError& e) {
            throw ConfigError(std::string("n, r: ") + e.what());
        }
    }

    RatioMultiset ratios() const {
        if (!has("ratios")) return gkf_ratios(gkc());
        if (!j["ratios"].is_array() || j["ratios"].empty()) throw ConfigError("ratios: expected [[ratio, multiplicity], ...]");
        std::vector<RatioEntry> e;
        for (const auto& x : j["ratios"]) {
            if (!x.is_array() || x.size() != 2 || !x[0].is_number() || !x[1].is_number_integer())
                throw ConfigError("ratios: each entry is [ratio, multiplicity]");
            e.push_back({x[0].get<double>(), x[1].get<int>()});
        }
        try {
            return RatioMultiset(e);
        } catch (const DomainError& err) {
            throw ConfigError(std::string("ratios: ") + err.what());
        }
    }
};

const std::map<std::string, json>& command_defaults() {
    static const std::map<std::string, json> d{
        {"dims", {{"ratios", nullptr}, {"n", 3}, {"r", "1/3"}, {"max_denominator", 64}}},
        {"poles", {{"ratios", nullptr}, {"n", 3}, {"r", "1/3"}, {"im_max", 40.0}, {"re_band", nullptr}, {"max_denominator", 64}}},
        {"tube",
         {{"n", 3},
          {"r", "1/3"},
          {"level", 5},
          {"h", 1e-3},
          {"region", "sector"},
          {"t_min", nullptr},
          {"t_max", 0.1},
          {"per_decade", 24},
          {"sfe_t_min", 0.01},
          {"sfe_t_max", 0.05},
          {"fit_t_min", nullptr},
          {"fit_t_max", nullptr}}},
        {"heat",
         {{"domain", "snowflake"},
          {"n", 3},
          {"r", "1/3"},
          {"level", 3},
          {"h", 4e-3},
          {"dt", nullptr},
          {"diffusivity", 1.0},
          {"t_min", nullptr},
          {"t_max", 1e-2},
          {"per_decade", 12},
          {"fit", true},
          {"remainder", true},
          {"scaling_lambda", nullptr},
          {"mc_paths", 0},
          {"mc_seed", 20240611},
          {"mc_workers", 2},
          {"dump_grid", false}}},
        {"explicit",
         {{"source", "cantor"},
          {"n", 3},
          {"r", "1/3"},
          {"level", 5},
          {"h", 1e-3},
          {"k", 2},
          {"cutoffs", {10, 20, 40, 80, 160}},
          {"t_min", 1e-3},
          {"t_max", 0.1},
          {"per_decade", 24},
          {"delta", nullptr},
          {"expected_exp", nullptr}}},
        {"render", {{"n", 3}, {"r", "1/3"}, {"level", 4}, {"shape", "snowflake"}, {"width", 800}}},
    };
    return d;
}

// "a.b=3" -> j["a"]["b"] = 3; the value is parsed as JSON when it is JSON, else kept as a string
void apply_override(json& j, const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + kv + "' is not key=value");
    const std::string key = kv.substr(0, eq), raw = kv.substr(eq + 1);
    json val = json::parse(raw, nullptr, false);
    if (val.is_discarded()) val = raw;
    json* cur = &j;
    std::size_t start = 0;
    for (;;) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (dot == std::string::npos) {
            (*cur)[part] = val;
            break;
        }
        cur = &(*cur)[part];
        start = dot + 1;
    }
}

json effective_config(const std::string& cmd, const json& file_cfg, const std::vector<std::string>& overrides) {
    json cfg = command_defaults().at(cmd);
    if (!file_cfg.is_object()) throw ConfigError("top level must be a JSON object");
    json user = file_cfg;
    for (const auto& o : overrides) apply_override(user, o);
    for (auto it = user.begin(); it != user.end(); ++it) {
        if (!cfg.contains(it.key())) throw ConfigError("unknown key '" + it.key() + "' for command " + cmd);
        cfg[it.key()] = it.value();
    }
    return cfg;
}

// ---------------------------------------------------------------------------------------------
// run bookkeeping

struct Run {
    fs::path dir;
    json results = json::object();
    json checks = json::object();
    json warnings = json::array();
    std::vector<std::string> files;

    void csv(const std::string& name, const io::CsvTable& t) {
        t.write(dir / name);
        files.push_back(name);
    }
    void svg(const std::string& name, const io::Svg& s) {
        s.write(dir / name);
        files.push_back(name);
    }
    void text(const std::string& name, const std::string& s) {
        io::atomic_write(dir / name, s);
        files.push_back(name);
    }
    void check(const std::string& name, bool ok, json detail = json::object()) {
        detail["pass"] = ok;
        checks[name] = std::move(detail);
    }
};

std::vector<double> grid_from(const Cfg& c, double t_min_default) {
    const double a = c.real("t_min", t_min_default), b = c.positive("t_max");
    if (!(a > 0 && b > a)) throw ConfigError("t_min, t_max: need 0 < t_min < t_max");
    return log_grid(a, b, c.positive("per_decade"));
}

// ---------------------------------------------------------------------------------------------
// commands

void cmd_dims(const Cfg& c, Run& run) {
    const auto rat = c.ratios();
    const double D = similarity_dimension(rat), Dl = lower_similarity_dimension(rat);
    const auto lat = detect_lattice(rat, c.integer("max_denominator", 1, 100000));
    io::CsvTable t({"quantity", "value"});
    t.row_text({"D", io::format_double(D)});
    t.row_text({"D_lower", io::format_double(Dl)});
    t.row_text({"lattice", lat ? "true" : "false"});
    t.row_text({"generator", lat ? io::format_double(lat->generator) : ""});
    run.csv("dims.csv", t);
    run.results = {{"D", D}, {"D_lower", Dl}, {"lattice", bool(lat)}};
    if (lat) run.results["generator"] = lat->generator;
    std::cout << "D = " << io::format_double(D) << "\nD_lower = " << io::format_double(Dl) << "\n"
              << (lat ? "lattice, generator " + io::format_double(lat->generator) : std::string("nonlattice")) << "\n";
    const DirichletPoly P(rat);
    run.check("moran_root", std::abs(P(D)) < 1e-12, {{"abs_P_at_D", std::abs(P(D))}});
}

void cmd_poles(const Cfg& c, Run& run) {
    const auto rat = c.ratios();
    const DirichletPoly P(rat);
    const double im_max = c.positive("im_max");
    const auto lat = detect_lattice(rat, c.integer("max_denominator", 1, 100000));
    ComplexDimensionSet set;
    if (lat) {
        set = lattice_poles(*lat, im_max);
    } else {
        const double D = similarity_dimension(rat), Dl = lower_similarity_dimension(rat);
        std::pair<double, double> band{Dl - 0.1, D + 0.1};
        if (c.has("re_band")) {
            const auto b = c.reals("re_band");
            if (b.size() != 2 || !(b[0] < b[1])) throw ConfigError("re_band: expected [lo, hi] with lo < hi");
            band = {b[0], b[1]};
        }
        set = nonlattice_poles(P, band, im_max);
    }
    io::CsvTable t({"re", "im", "residue_re", "residue_im", "multiplicity", "abs_P"});
    double worst = 0;
    for (const auto& p : set.poles) {
        const double ap = std::abs(P(p.omega));
        worst = std::max(worst, ap);
        t.row({p.omega.real(), p.omega.imag(), p.residue.real(), p.residue.imag(), double(p.multiplicity), ap});
    }
    run.csv("poles.csv", t);
    run.svg("poles.svg", io::pole_plot(set));
    run.text("poles.json", to_json(set).dump(2) + "\n");
    run.results = {{"count", set.poles.size()}, {"lattice", bool(lat)}, {"max_abs_P", worst}};
    run.check("zeros_of_P", worst < kPoleTol, {{"max_abs_P", worst}});
    std::cout << set.poles.size() << " poles with |Im| <= " << im_max << (lat ? " (lattice)" : " (nonlattice)") << "\n";
}

void cmd_tube(const Cfg& c, Run& run) {
    const auto p = c.gkc();
    const int level = c.integer("level", 0, 12);
    const double h = c.positive("h");
    const auto region = c.str("region", {"sector", "snowflake"});
    const auto ts = grid_from(c, 5 * h);
    if (ts.front() < 5 * h) throw ConfigError("t_min: must be at least 5 h");
    const auto s = snowflake(p, level);
    for (const auto& w : s.warnings) run.warnings.push_back(w);
    const RegionPolygon U = region == "sector" ? sector_region(s, 0) : s.polygon();
    DistanceOptions o;
    o.cap = ts.back() * 1.01;
    const auto V = tube_function(distance_field(s.boundary, U, h, o), ts);
    io::CsvTable tv({"t", "V"});
    for (std::size_t i = 0; i < V.size(); ++i) tv.row({V.ts[i], V.vals[i]});
    run.csv("tube.csv", tv);

    const double fa = c.real("fit_t_min", ts.front()), fb = c.real("fit_t_max", ts.back());
    const auto fit = minkowski_fit(V, fa, fb);
    const double D = similarity_dimension(gkf_ratios(p));
    run.results["minkowski_fit"] = {{"D", fit.D}, {"content", fit.content}, {"samples", fit.samples}, {"window", {fa, fb}}};
    run.results["similarity_dimension"] = D;
    run.check("minkowski_fit", std::abs(fit.D - D) <= 0.05, {{"D_fit", fit.D}, {"D", D}});

    const double sa = c.positive("sfe_t_min"), sb = c.positive("sfe_t_max");
    if (sb > sa) {
        SfeOptions so;
        so.full_snowflake = region == "snowflake";
        const auto rep = verify_gkf_sfe(p, level, log_grid(sa, sb, 8), h, so);
        io::CsvTable tr({"t", "V", "rho", "bound", "budget"});
        double worst = 0;
        for (std::size_t i = 0; i < rep.ts.size(); ++i) {
            tr.row({rep.ts[i], rep.V[i], rep.rho[i], rep.bound[i], rep.budget[i]});
            worst = std::max(worst, rep.rho[i] / (rep.ts[i] * rep.ts[i]));
        }
        run.csv("sfe.csv", tr);
        run.results["sfe"] = {{"bound_constant", rep.bound_constant}, {"max_rho_over_t2", worst}, {"delta_L", rep.delta_L}};
        run.check("sfe_residual", rep.pass(), {{"lower_ok", rep.lower_ok}, {"upper_ok", rep.upper_ok}});
    }
    std::cout << "V sampled at " << V.size() << " points; fitted D = " << fit.D << " (similarity " << D << ")\n";
}

RegionPolygon unit_square() { return {{{0, 0}, {1, 0}, {1, 1}, {0, 1}}}; }

void cmd_heat(const Cfg& c, Run& run) {
    const auto domain = c.str("domain", {"square", "snowflake"});
    const double h = c.positive("h");
    const double dt = c.real("dt", h * h / 2);
    const auto ts = grid_from(c, 25 * h * h);
    if (ts.front() < 25 * h * h) throw ConfigError("t_min: must be at least 25 h^2");
    HeatProblem pb;
    pb.diffusivity = c.positive("diffusivity");
    std::optional<GKCParams> gp;
    if (domain == "square") {
        pb.region = unit_square();
    } else {
        gp = c.gkc();
        const auto s = snowflake(*gp, c.integer("level", 0, 10));
        for (const auto& w : s.warnings) run.warnings.push_back(w);
        pb.region = s.polygon();
    }
    HeatOptions opt;
    opt.keep_fields = c.flag("dump_grid");
    const auto F = solve_heat_fdm(pb, h, dt, ts.back(), ts, opt);
    const auto E = heat_content(F);
    const bool oracle = domain == "square" && pb.diffusivity == 1.0;
    io::CsvTable te(oracle ? std::vector<std::string>{"t", "E", "E_oracle"} : std::vector<std::string>{"t", "E"});
    double worst = 0;
    for (std::size_t i = 0; i < E.size(); ++i) {
        if (oracle) {
            const double w = unit_square_content(E.ts[i]);
            worst = std::max(worst, std::abs(E.vals[i] - w) / w);
            te.row({E.ts[i], E.vals[i], w});
        } else {
            te.row({E.ts[i], E.vals[i]});
        }
    }
    run.csv("content.csv", te);
    run.results["solver"] = F.meta;
    if (oracle) run.check("square_oracle", worst <= 0.015, {{"max_rel_dev", worst}});
    if (opt.keep_fields) {
        io::write_grid(run.dir / "u_final.bin", F.u.back(), F.nx, F.ny, F.xmin, F.ymin, F.h);
        run.files.push_back("u_final.bin");
        run.files.push_back("u_final.json");
    }

    if (c.flag("fit")) {
        const auto f = heat_exponent_fit(E, ts.front(), ts.back());
        run.results["exponent_fit"] = {{"p", f.p}, {"a", f.a}, {"b", f.b}, {"rms", f.rms}, {"samples", f.samples}};
        if (gp) {
            const double want = (2 - similarity_dimension(gkf_ratios(*gp))) / 2;
            run.check("exponent", std::abs(f.p - want) <= 0.05, {{"p", f.p}, {"expected", want}});
        }
        std::cout << "fit E ~ a t^p + b t: p = " << f.p << ", a = " << f.a << ", b = " << f.b << "\n";
    }

    if (c.has("scaling_lambda")) {
        const double lam = c.positive("scaling_lambda");
        const auto rep = verify_heat_scaling(pb, lam, ts, h, 0.0, 0.02, opt);
        io::CsvTable t({"t", "E_scaled", "lambda2_E", "rel_dev"});
        for (std::size_t i = 0; i < rep.ts.size(); ++i) t.row({rep.ts[i], rep.lhs[i], rep.rhs[i], rep.deviation[i]});
        run.csv("scaling.csv", t);
        run.check("two_scaling_law", rep.pass, {{"max_rel_dev", rep.max_rel_dev}, {"lambda", lam}});
    }

    if (gp && c.flag("remainder")) {
        const auto rep = decomposition_remainder(*gp, c.integer("level", 0, 10), ts, h, opt);
        io::CsvTable t({"t", "R", "R_over_t"});
        for (std::size_t i = 0; i < rep.remainder.size(); ++i)
            t.row({rep.remainder.ts[i], rep.remainder.vals[i], rep.remainder.vals[i] / rep.remainder.ts[i]});
        run.csv("remainder.csv", t);
        run.results["remainder"] = rep.remainder.meta;
        run.check("remainder_bounded", rep.bounded, {{"C_small", rep.C_small}, {"C_large", rep.C_large}});
    }

    const int paths = c.integer("mc_paths", 0, 1'000'000'000);
    if (paths > 0) {
        MonteCarloOptions mo;
        mo.paths = std::size_t(paths);
        mo.seed = std::uint64_t(c.integer("mc_seed", 0, std::numeric_limits<int>::max()));
        mo.workers = unsigned(c.integer("mc_workers", 1, 256));
        const std::vector<double> mts{ts.front(), std::sqrt(ts.front() * ts.back()), ts.back()};
        const auto M = monte_carlo_content(pb, mts, mo);
        io::CsvTable t({"t", "E_mc", "sigma", "E_fdm", "z"});
        bool ok = true;
        for (std::size_t i = 0; i < M.ts.size(); ++i) {
            const double e = E(M.ts[i]), z = (M.content[i] - e) / M.sigma[i];
            ok &= std::abs(z) <= 3;
            t.row({M.ts[i], M.content[i], M.sigma[i], e, z});
        }
        run.csv("monte_carlo.csv", t);
        run.check("monte_carlo_3sigma", ok);
    }
}

struct ExplicitInputs {
    RatioMultiset ratios;
    SampledFunction f, R, direct;
    double delta, beta, alpha;
};

// Cantor string: f = V/t, R = V/t - 2 V(3t)/(3t) = 2 on (0, 1/6].
ExplicitInputs cantor_inputs(const Cfg& c, int k) {
    const auto cs = cantor_string();
    const double delta = c.real("delta", 1.0 / 6);
    auto tf = log_grid(delta, 3 * delta, 200);
    std::vector<double> fv, rv, dv;
    for (double t : tf) fv.push_back(cs.tube(t) / t);
    auto tr = log_grid(1e-7, delta, 24);
    for (double t : tr) rv.push_back((cs.tube(t) - 2.0 / 3 * cs.tube(3 * t)) / t);
    const auto td = grid_from(c, 1e-3);
    for (double t : td) dv.push_back(cs.tube(t, k));
    return {RatioMultiset({{1.0 / 3, 2}}), SampledFunction(tf, fv), SampledFunction(tr, rv), SampledFunction(td, dv), delta, 1.0, 1.0};
}

// Sector tube data, normalized by t^2 (beta = 2, alpha = 1).
ExplicitInputs tube_inputs(const Cfg& c, int k) {
    const auto p = c.gkc();
    const double h = c.positive("h");
    const auto s = snowflake(p, c.integer("level", 0, 12));
    const auto U = sector_region(s, 0);
    const TubeCounter V(distance_field(s.boundary, U, h));
    const auto rat = gkf_ratios(p);
    const double lmin = std::min(p.ell(), p.r);
    const auto tall = log_grid(5 * h, 0.5, 48);
    std::vector<double> vall;
    for (double t : tall) vall.push_back(V(t));
    const SampledFunction Vs(tall, vall);
    const double delta = c.real("delta", std::min(default_delta(Vs, V.area()), 0.5 * lmin));
    if (!(delta > 5 * h && delta / lmin <= 0.5)) throw ConfigError("delta: must lie in (5h, 0.5 min ratio]");
    std::vector<double> fv, rv;
    const auto tf = log_grid(delta, delta / lmin, 96);
    for (double t : tf) fv.push_back(V(t) / (t * t));
    const auto tr = log_grid(5 * h, delta, 48);
    for (double t : tr) {
        double rho = V(t);
        for (auto e : rat.entries()) rho -= e.multiplicity * e.ratio * e.ratio * V(t / e.ratio);
        rv.push_back(rho / (t * t));
    }
    const auto Vk = antiderivative(Vs, k);
    const auto td = grid_from(c, 5 * h);
    std::vector<double> dv;
    for (double t : td) dv.push_back(Vk(t));
    return {rat, SampledFunction(tf, fv), SampledFunction(tr, rv), SampledFunction(td, dv), delta, 2.0, 1.0};
}

// Snowflake heat content, normalized by t (beta = 2, alpha = 2).
ExplicitInputs heat_inputs(const Cfg& c, int k) {
    const auto p = c.gkc();
    const double h = c.positive("h");
    const auto s = snowflake(p, c.integer("level", 0, 10));
    const auto rat = gkf_ratios(p);
    const double lmin = std::min(p.ell(), p.r);
    const double delta = c.real("delta", 4e-3);
    const double t0 = 25 * h * h;
    if (!(delta > t0)) throw ConfigError("delta: must exceed 25 h^2");
    const auto td = grid_from(c, t0);
    const double tend = std::max(delta / (lmin * lmin), td.back());
    auto save = log_grid(t0, tend, 24);
    for (double t : td) save.push_back(t);
    std::sort(save.begin(), save.end());
    save.erase(std::unique(save.begin(), save.end(), [](double a, double b) { return std::abs(a - b) <= 1e-12 * b; }), save.end());
    HeatOptions opt;
    opt.keep_fields = false;
    const auto E = heat_content(solve_heat_fdm({s.polygon(), 1.0}, h, h * h / 2, save.back(), save, opt));
    std::vector<double> fv, rv;
    const auto tf = log_grid(delta, delta / (lmin * lmin), 48);
    for (double t : tf) fv.push_back(E(t) / t);
    const auto tr = log_grid(t0, delta, 24);
    for (double t : tr) {
        double rem = E(t);
        for (auto e : rat.entries()) rem -= e.multiplicity * e.ratio * e.ratio * E(t / (e.ratio * e.ratio));
        rv.push_back(rem / t);
    }
    const auto Ek = antiderivative(E, k);
    std::vector<double> dv;
    for (double t : td) dv.push_back(Ek(t));
    return {rat, SampledFunction(tf, fv), SampledFunction(tr, rv), SampledFunction(td, dv), delta, 2.0, 2.0};
}

void cmd_explicit(const Cfg& c, Run& run) {
    const auto source = c.str("source", {"cantor", "tube", "heat"});
    const int k = c.integer("k", 2, 8);
    auto cutoffs = c.reals("cutoffs");
    for (double T : cutoffs)
        if (!(T > 0)) throw ConfigError("cutoffs: must be positive");
    std::sort(cutoffs.begin(), cutoffs.end());
    const auto in = source == "cantor" ? cantor_inputs(c, k) : source == "tube" ? tube_inputs(c, k) : heat_inputs(c, k);

    const auto lat = detect_lattice(in.ratios);
    const DirichletPoly P(in.ratios);
    const auto dims = lat ? lattice_poles(*lat, cutoffs.back())
                          : nonlattice_poles(P, {lower_similarity_dimension(in.ratios) - 0.1, similarity_dimension(in.ratios) + 0.1},
                                             cutoffs.back());
    const ContinuedZeta Z(in.ratios, in.f, in.R, in.delta, in.alpha);
    const auto res = Z.residues(dims);
    const auto tb = build_terms(dims, res, in.beta, in.alpha, k);
    for (const auto& w : tb.warnings) run.warnings.push_back(w);

    io::CsvTable tt({"omega_re", "omega_im", "residue_re", "residue_im", "coeff_re", "coeff_im", "exponent_re", "exponent_im"});
    for (std::size_t i = 0, j = 0; i < dims.poles.size(); ++i) {
        if (dims.poles[i].multiplicity != 1) continue;
        const auto& t = tb.terms[j++];
        tt.row({t.omega.real(), t.omega.imag(), res[i].real(), res[i].imag(), t.coeff.real(), t.coeff.imag(), t.exponent.real(),
                t.exponent.imag()});
    }
    run.csv("terms.csv", tt);

    const auto ser = evaluate_sum(tb.terms, in.direct.ts, cutoffs);
    std::vector<std::string> hdr{"t", "direct"};
    for (double T : cutoffs) hdr.push_back("S_" + io::format_double(T));
    io::CsvTable ts(hdr);
    for (std::size_t i = 0; i < in.direct.size(); ++i) {
        std::vector<double> row{in.direct.ts[i], in.direct.vals[i]};
        for (const auto& s : ser.sums) row.push_back(s[i]);
        ts.row(row);
    }
    run.csv("partial_sums.csv", ts);

    const double expect = c.real("expected_exp", in.beta / in.alpha + k);
    const auto rep = compare_explicit(in.direct, ser, expect);
    run.results = {{"source", source},
                   {"poles", dims.poles.size()},
                   {"delta", in.delta},
                   {"max_rel_dev", rep.max_rel_dev},
                   {"residual_slope", std::isfinite(rep.slope) ? json(rep.slope) : json(nullptr)},
                   {"expected_exp", expect},
                   {"floor_case", rep.floor_case},
                   {"leakage", ser.leakage}};
    run.check("residual_slope", rep.slope_ok, {{"slope", run.results["residual_slope"]}, {"expected", expect}});
    std::cout << dims.poles.size() << " poles; max relative deviation " << rep.max_rel_dev << "; residual slope " << rep.slope << "\n";
}

void cmd_render(const Cfg& c, Run& run) {
    const auto p = c.gkc();
    const int level = c.integer("level", 0, 10);
    const auto shape = c.str("shape", {"curve", "snowflake", "sector"});
    const double width = c.positive("width");
    PolylineCurve pc;
    bool closed = true;
    if (shape == "curve") {
        pc = prefractal(p, level);
        closed = false;
    } else {
        const auto s = snowflake(p, level);
        for (const auto& w : s.warnings) run.warnings.push_back(w);
        pc.vertices = shape == "snowflake" ? s.boundary.vertices : sector_region(s, 0).vertices;
    }
    BBox b = pc.bbox();
    const double pad = 0.02 * std::max(b.width(), b.height());
    b = {b.xmin - pad, b.ymin - pad, b.xmax + pad, b.ymax + pad};
    io::Svg svg(b, width);
    svg.polyline(pc.vertices, closed, "black", 0.6, closed ? "#e8eef7" : "none");
    run.svg("render.svg", svg);
    io::CsvTable t({"x", "y"});
    for (auto v : pc.vertices) t.row({v.x, v.y});
    run.csv("vertices.csv", t);
    run.results = {{"vertices", pc.vertices.size()}, {"simple", closed ? is_simple(pc) : true}};
    std::cout << shape << " level " << level << ": " << pc.vertices.size() << " vertices\n";
}

using Handler = void (*)(const Cfg&, Run&);

const std::map<std::string, std::pair<Handler, const char*>>& commands() {
    static const std::map<std::string, std::pair<Handler, const char*>> m{
        {"dims", {cmd_dims, "similarity dimensions and lattice verdict"}},
        {"poles", {cmd_poles, "possible complex dimensions in a window (CSV + SVG)"}},
        {"tube", {cmd_tube, "tube function of a snowflake sector, SFE check, Minkowski fit"}},
        {"heat", {cmd_heat, "heat content, scaling law, remainder and exponent fit"}},
        {"explicit", {cmd_explicit, "pointwise explicit formula against direct data"}},
        {"render", {cmd_render, "SVG of a prefractal curve, snowflake or sector"}},
    };
    return m;
}

fs::path cache_root() {
    if (const char* e = std::getenv("FRACTAL_DIMS_CACHE"); e && *e) return e;
    if (const char* x = std::getenv("XDG_CACHE_HOME"); x && *x) return fs::path(x) / "fractal-dims";
    if (const char* hm = std::getenv("HOME"); hm && *hm) return fs::path(hm) / ".cache" / "fractal-dims";
    return fs::temp_directory_path() / "fractal-dims-cache";
}

json file_list(const fs::path& dir, const std::vector<std::string>& names) {
    json out = json::array();
    for (const auto& n : names) out.push_back({{"name", n}, {"sha256", sha256_hex(io::read_file(dir / n))}});
    return out;
}

bool all_pass(const json& checks) {
    for (const auto& [k, v] : checks.items())
        if (!v.value("pass", false)) return false;
    return true;
}

int execute(const std::string& cmd, const fs::path& config_path, const std::optional<fs::path>& out_dir,
            const std::vector<std::string>& overrides, bool use_cache) {
    const std::string raw = io::read_file(config_path);
    const json file_cfg = json::parse(raw, nullptr, false);
    if (file_cfg.is_discarded()) throw ConfigError(config_path.string() + " is not valid JSON");
    const json cfg = effective_config(cmd, file_cfg, overrides);
    // canonical form: sorted keys, no whitespace
    const std::string hash = sha256_hex(json{{"command", cmd}, {"config", cfg}}.dump());

    const fs::path cached = cache_root() / "results" / hash;
    json manifest;
    if (use_cache && fs::exists(cached / "manifest.json")) {
        manifest = json::parse(io::read_file(cached / "manifest.json"));
        std::cout << "cache hit " << hash.substr(0, 12) << "\n";
        manifest["from_cache"] = true;
    } else {
        Run run;
        const auto t0 = std::chrono::steady_clock::now();
        run.dir = use_cache ? cached.parent_path() / (hash + ".tmp-" + std::to_string(::getpid())) : out_dir.value_or(fs::path("."));
        fs::create_directories(run.dir);
        commands().at(cmd).first(Cfg{cfg}, run);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        manifest = {{"tool", "fractal-dims"},
                    {"version", kVersion},
                    {"command", cmd},
                    {"config", cfg},
                    {"config_hash", hash},
                    {"inputs", {{{"name", config_path.filename().string()}, {"sha256", sha256_hex(raw)}}}},
                    {"files", file_list(run.dir, run.files)},
                    {"results", run.results},
                    {"checks", run.checks},
                    {"warnings", run.warnings},
                    {"timing_seconds", secs},
                    {"from_cache", false}};
        io::atomic_write(run.dir / "manifest.json", manifest.dump(2) + "\n");
        if (use_cache) {
            std::error_code ec;
            fs::rename(run.dir, cached, ec);
            if (ec) fs::remove_all(run.dir);  // another process won the race; its result is identical
        }
    }

    const fs::path src = use_cache ? cached : out_dir.value_or(fs::path("."));
    if (out_dir && use_cache) {
        fs::create_directories(*out_dir);
        for (const auto& f : manifest["files"]) {
            const std::string name = f["name"];
            io::atomic_write(*out_dir / name, io::read_file(src / name));
        }
        io::atomic_write(*out_dir / "manifest.json", manifest.dump(2) + "\n");
    }
    const fs::path where = out_dir.value_or(src);
    std::cout << "results: " << where.string() << "\n";
    for (const auto& [k, v] : manifest["checks"].items()) std::cout << "check " << k << ": " << (v["pass"].get<bool>() ? "PASS" : "FAIL") << "\n";
    return all_pass(manifest["checks"]) ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fractal-dims: similarity and complex dimensions, tube and heat content of self-similar fractals"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    struct Opts {
        std::string config;
        std::string out;
        std::vector<std::string> set;
        bool no_cache = false;
    };
    std::map<std::string, Opts> opts;
    for (const auto& [name, entry] : commands()) {
        auto* sub = app.add_subcommand(name, entry.second);
        auto& o = opts[name];
        sub->add_option("--config", o.config, "JSON config file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", o.out, "output directory (gets a copy of every file and the manifest)");
        sub->add_option("--set", o.set, "override a config value, key=value (repeatable)");
        sub->add_flag("--no-cache", o.no_cache, "compute directly into --out without reading or writing the cache");
    }
    CLI11_PARSE(app, argc, argv);

    const auto* sub = app.get_subcommands().front();
    const std::string cmd = sub->get_name();
    const auto& o = opts[cmd];
    try {
        std::optional<fs::path> out;
        if (!o.out.empty()) out = o.out;
        if (o.no_cache && !out) throw ConfigError("--no-cache needs --out");
        return execute(cmd, o.config, out, o.set, !o.no_cache);
    } catch (const ConfigError& e) {
        std::cerr << "fractal-dims " << cmd << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "fractal-dims " << cmd << ": " << e.what() << "\n";
        return 1;
    }
}

// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.
#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <cstdlib>
#include <vector>

#include "stmca/analysis.hpp"
#include "stmca/catalog.hpp"
#include "stmca/commands.hpp"
#include "stmca/estimators.hpp"
#include "stmca/grid.hpp"
#include "stmca/moments.hpp"
#include "stmca/walk.hpp"

using namespace stmca;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Exact piecewise integration of G(x, y) w(y) m(dy) for a diffusion whose
// scale is piecewise linear and whose density is piecewise constant.
struct PiecewiseOracle {
    std::function<double(double)> s;
    std::function<double(double)> density;
    std::vector<Atom> atoms;
    std::vector<double> kinks;

    double green(double a, double b, double x, double y) const {
        const double lo = std::min(x, y), hi = std::max(x, y);
        return (s(lo) - s(a)) * (s(b) - s(hi)) / (s(b) - s(a));
    }
    double v0(double a, double b, double y) const { return (s(y) - s(a)) / (s(b) - s(a)); }

    // {v1, v1_bar} at x
    std::pair<double, double> moments(double a, double x, double b) const {
        std::vector<double> pts{a, x, b};
        for (double k : kinks) {
            if (k > a && k < b) pts.push_back(k);
        }
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
        double v1 = 0.0, v1b = 0.0;
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            auto up = [&](double y) { return green(a, b, x, y) * v0(a, b, y) * density(y); };
            auto dn = [&](double y) { return green(a, b, x, y) * (1.0 - v0(a, b, y)) * density(y); };
            v1 += boost::math::quadrature::gauss<double, 10>::integrate(up, pts[i], pts[i + 1]);
            v1b += boost::math::quadrature::gauss<double, 10>::integrate(dn, pts[i], pts[i + 1]);
        }
        for (const Atom& at : atoms) {
            if (at.location > a && at.location < b) {
                v1 += at.mass * green(a, b, x, at.location) * v0(a, b, at.location);
                v1b += at.mass * green(a, b, x, at.location) * (1.0 - v0(a, b, at.location));
            }
        }
        return {v1, v1b};
    }
};

// Brownian closed forms (generator u''/2, m = 2 dx).
double bm_v1(double a, double x, double b) { return (x - a) * (b - x) * (b + x - 2.0 * a) / (3.0 * (b - a)); }
double bm_v1_bar(double a, double x, double b) { return (b - x) * (x - a) * (2.0 * b - x - a) / (3.0 * (b - a)); }

struct RandomCell {
    double a, x, b;
};

std::vector<RandomCell> random_cells(std::mt19937_64& rng, int n, double span) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<RandomCell> cells;
    for (int i = 0; i < n; ++i) {
        const double width = std::pow(10.0, -3.0 + 3.3 * u(rng));
        double a;
        switch (i % 3) {
            case 0: a = -width * (0.05 + 0.9 * u(rng)); break;  // straddles 0
            case 1: a = -width * (0.05 + 0.9 * u(rng)); break;
            default: a = -span + (2.0 * span - width) * u(rng); break;
        }
        const double b = a + width;
        double x = a + width * (0.02 + 0.96 * u(rng));
        if (i % 3 == 1) x = 0.0;
        cells.push_back({a, x, b});
    }
    return cells;
}

double rel(double q, double o) { return std::abs(q - o) / std::max(std::abs(o), 1e-300); }

// 1. Closed-form oracle equivalence.
Outcome criterion1() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    std::string worst_where;
    int checked = 0;
    for (const std::string id : {"bm", "sticky_bm", "skew_bm"}) {
        for (const auto& c : random_cells(rng, 200, 3.0)) {
            PiecewiseOracle oracle;
            DiffusionSpec spec;
            double ov1, ov1b, ov0;
            if (id == "bm") {
                spec = catalog::bm();
                ov0 = (c.x - c.a) / (c.b - c.a);
                ov1 = bm_v1(c.a, c.x, c.b);
                ov1b = bm_v1_bar(c.a, c.x, c.b);
            } else if (id == "sticky_bm") {
                const double rho = 0.1 + 2.9 * u(rng);
                spec = catalog::sticky_bm(rho);
                ov0 = (c.x - c.a) / (c.b - c.a);
                ov1 = bm_v1(c.a, c.x, c.b);
                ov1b = bm_v1_bar(c.a, c.x, c.b);
                if (c.a < 0.0 && 0.0 < c.b) {
                    const double g = (std::min(c.x, 0.0) - c.a) * (c.b - std::max(c.x, 0.0)) / (c.b - c.a);
                    ov1 += rho * g * (-c.a) / (c.b - c.a);
                    ov1b += rho * g * c.b / (c.b - c.a);
                }
            } else {
                const double beta = 0.05 + 0.9 * u(rng);
                spec = catalog::skew_bm(beta);
                oracle.s = [beta](double y) { return y >= 0.0 ? y / beta : y / (1.0 - beta); };
                oracle.density = [beta](double y) { return y > 0.0 ? 2.0 * beta : 2.0 * (1.0 - beta); };
                oracle.kinks = {0.0};
                ov0 = oracle.v0(c.a, c.b, c.x);
                std::tie(ov1, ov1b) = oracle.moments(c.a, c.x, c.b);
            }
            const CellQuantities q = cell_quantities(spec, c.a, c.x, c.b, Method::quadrature, 16);
            for (const auto& [qv, o, name] : {std::tuple{q.v0, ov0, "v0"}, std::tuple{q.v1, ov1, "v1"},
                                              std::tuple{q.v1_bar, ov1b, "v1_bar"}}) {
                const double e = rel(qv, o);
                if (e > worst) {
                    worst = e;
                    worst_where = fmt("%s %s on (%.6g, %.6g, %.6g)", id.c_str(), name, c.a, c.x, c.b);
                }
            }
            ++checked;
        }
    }
    const double secs = seconds_since(t0);
    const bool pass = worst <= 1e-7 && secs < 10.0;
    return {pass, fmt("%d cells, worst relative error %.3g (%s), %.2f s", checked, worst, worst_where.c_str(), secs)};
}

struct NamedSpec {
    std::string name;
    DiffusionSpec spec;
    double lo, hi;  // range for random cells
};

std::vector<NamedSpec> moment_test_specs() {
    return {{"bm", catalog::bm(), -3.0, 3.0},
            {"sticky_bm(1)", catalog::sticky_bm(1.0), -1.0, 1.0},
            {"sticky_bm(0.3)", catalog::sticky_bm(0.3), -1.0, 1.0},
            {"skew_bm(0.9)", catalog::skew_bm(0.9), -2.0, 2.0},
            {"ou(1,0,1)", catalog::ou(1.0, 0.0, 1.0), -3.0, 3.0},
            {"cir(5,5,1)", catalog::cir(5.0, 5.0, 1.0), 0.5, 10.0},
            {"bessel(1.5)", catalog::bessel(1.5), 0.0, 3.0},
            {"bessel(3)", catalog::bessel(3.0), 0.05, 3.0},
            {"skew_bessel(1.5,0.7)", catalog::skew_bessel(1.5, 0.7), -2.0, 2.0}};
}

std::vector<RandomCell> cells_in(std::mt19937_64& rng, double lo, double hi, int n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<RandomCell> out;
    for (int i = 0; i < n; ++i) {
        const double width = std::min(hi - lo, std::pow(10.0, -2.5 + 2.7 * u(rng)));
        double a = lo + (hi - lo - width) * u(rng);
        if (i % 4 == 0 && lo < 0.0 && hi > 0.0) a = -width * (0.1 + 0.8 * u(rng));
        const double b = a + width;
        double x = a + width * (0.02 + 0.96 * u(rng));
        if (i % 4 == 1 && a < 0.0 && b > 0.0) x = 0.0;
        out.push_back({a, x, b});
    }
    return out;
}

// 2. Moment ratio and factorial bounds.
Outcome criterion2() {
    std::mt19937_64 rng(7);
    int cells = 0, violations = 0;
    double worst_ratio = 0.0;
    std::string first_violation;
    for (const auto& ns : moment_test_specs()) {
        for (const auto& c : cells_in(rng, ns.lo, ns.hi, 40)) {
            const double xi = scale_speed_product(ns.spec, c.a, c.b, 32);
            const MomentProfile prof = moment_profile(ns.spec, c.a, c.x, c.b, 3, 32);
            for (const auto* v : {&prof.v, &prof.v_bar}) {
                double fact = 1.0;
                for (int k = 1; k <= 3; ++k) {
                    fact *= k;
                    const double vk = (*v)[static_cast<std::size_t>(k)], prev = (*v)[static_cast<std::size_t>(k - 1)];
                    const double ratio_use = vk / (k * xi * prev);
                    const double fact_use = vk / (fact * std::pow(xi, k));
                    worst_ratio = std::max({worst_ratio, ratio_use, fact_use});
                    if (ratio_use > 1.0 + 1e-10 || fact_use > 1.0 + 1e-10) {
                        if (violations++ == 0)
                            first_violation = fmt(" first: %s k=%d on (%.6g, %.6g, %.6g)", ns.name.c_str(), k, c.a, c.x, c.b);
                    }
                }
            }
            ++cells;
        }
    }
    return {violations == 0,
            fmt("%d cells over %zu diffusions, k <= 3, %d violations, largest bound usage %.4f%s", cells,
                moment_test_specs().size(), violations, worst_ratio, first_violation.c_str())};
}

// 3. v1 + v1_bar equals the Green integral of the speed measure.
Outcome criterion3() {
    std::mt19937_64 rng(11);
    int cells = 0, bad = 0;
    double worst = 0.0, worst_closed = 0.0;
    for (const auto& ns : moment_test_specs()) {
        for (const auto& c : cells_in(rng, ns.lo, ns.hi, 40)) {
            const CellQuantities q = cell_quantities(ns.spec, c.a, c.x, c.b, Method::quadrature, 16);
            const double green = mean_exit_time(ns.spec, c.a, c.x, c.b, 64);
            const double e = rel(q.mean_exit(), green);
            worst = std::max(worst, e);
            if (e > 1e-8) ++bad;
            if (ns.spec.catalog_id == "sticky_bm" || ns.spec.catalog_id == "bm") {
                double closed = (c.x - c.a) * (c.b - c.x);
                const double rho = ns.spec.speed.atom_mass_at(0.0);
                if (rho > 0.0 && c.a < 0.0 && c.b > 0.0)
                    closed += rho * (std::min(c.x, 0.0) - c.a) * (c.b - std::max(c.x, 0.0)) / (c.b - c.a);
                const double ec = rel(q.mean_exit(), closed);
                worst_closed = std::max(worst_closed, ec);
                if (ec > 1e-8) ++bad;
            }
            ++cells;
        }
    }
    return {bad == 0, fmt("%d cells, worst relative gap to the Green integral %.3g, to the closed sticky/Brownian "
                          "mean exit time %.3g, %d failures",
                          cells, worst, worst_closed, bad)};
}

// 4. Embedding oracle on a 21-point nonuniform grid.
Outcome criterion4() {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<double> pts;
    for (int j = 0; j <= 20; ++j) {
        const double u = j / 20.0;
        pts.push_back(-1.0 + 2.0 * u * u * (1.5 - 0.5 * u) + 0.01 * std::sin(7.0 * j));
    }
    std::sort(pts.begin(), pts.end());
    const Grid grid(pts, Interval(-kInf, kInf));
    const DiffusionSpec spec = catalog::bm();
    const TransitionTable table = build_table(spec, grid);
    const auto emp = embed_oracle_bm(grid, 0.0, 20000, 1e-5, RngSpec{99, 0}, EmbedMode::restart);
    double worst = 0.0;
    for (const auto& e : emp) {
        const double z = std::abs(e.p_hat - table.rows[e.index].p_plus) / e.standard_error;
        worst = std::max(worst, z);
    }
    const double secs = seconds_since(t0);
    return {worst <= 4.0 && secs < 60.0,
            fmt("%zu interior points, 20000 exits each, largest |p_hat - p_plus| = %.2f standard errors, %.1f s",
                emp.size(), worst, secs)};
}

std::vector<double> untruncated(const TerminalBatch& b) {
    std::vector<double> v;
    for (std::size_t p = 0; p < b.truncated.size(); ++p) {
        if (!b.truncated[p]) v.push_back(b.values[0][p]);
    }
    return v;
}

struct ErrorPoint {
    double h, max_cell, x_norm, w1;
    std::size_t truncated;
};

ErrorPoint terminal_error(const DiffusionSpec& spec, const Grid& grid, const ReferenceKernel& ref, double x0, double t,
                          std::size_t n, std::uint64_t seed, double h) {
    const TransitionTable table = build_table(spec, grid);
    const TerminalBatch b = simulate_terminal(spec, grid, table, x0, {t}, n, seed);
    const GridMetrics m = metrics(spec, grid);
    return {h, m.max_cell, m.x_norm, wasserstein_to_reference(EmpiricalLaw(untruncated(b)), ref, 1.0),
            b.truncated_count()};
}

// 5. Donsker-rate check for Brownian motion.
Outcome criterion5() {
    const auto t0 = std::chrono::steady_clock::now();
    const DiffusionSpec spec = catalog::bm();
    const ReferenceKernel ref = reference_kernel("bm", {}, 0.0, 1.0);
    std::vector<RatePoint> pts;
    std::string detail;
    for (double h : {0.2, 0.1, 0.05, 0.025}) {
        const Grid grid = uniform_grid(spec.domain, h, Interval(-6.0, 6.0, true, true));
        const ErrorPoint e = terminal_error(spec, grid, ref, 0.0, 1.0, 100000, 5, h);
        pts.push_back({e.x_norm, e.w1});
        detail += fmt(" h=%g: ||g||=%.4g W1=%.4g;", h, e.x_norm, e.w1);
    }
    const RateFit fit = rate_fit(pts);
    const double secs = seconds_since(t0);
    return {fit.slope >= 0.35 && fit.slope <= 0.65 && secs < 300.0,
            fmt("slope vs ||g||_X = %.3f (r2 %.3f), %.0f s;", fit.slope, fit.r2, secs) + detail};
}

// 6. Tuned versus uniform grid for sticky Brownian motion.
Outcome criterion6() {
    const auto t0 = std::chrono::steady_clock::now();
    const double rho = 1.0;
    const DiffusionSpec spec = catalog::sticky_bm(rho);
    const ReferenceKernel ref = reference_kernel("sticky_bm", {{"rho", rho}}, 0.0, 1.0);
    const Interval window(-6.0, 6.0, true, true);
    std::vector<RatePoint> uni, tun;
    bool ordered = true;
    std::string detail;
    for (double h : {0.1, 0.05, 0.025}) {
        const ErrorPoint eu = terminal_error(spec, uniform_grid(spec.domain, h, window), ref, 0.0, 1.0, 100000, 6, h);
        const ErrorPoint et = terminal_error(spec, tuned_grid_sticky(h, rho, window), ref, 0.0, 1.0, 100000, 6, h);
        uni.push_back({eu.max_cell, eu.w1});
        tun.push_back({et.max_cell, et.w1});
        if (et.w1 > eu.w1) ordered = false;
        detail += fmt(" h=%g: uniform W1=%.4g tuned W1=%.4g;", h, eu.w1, et.w1);
    }
    const RateFit fu = rate_fit(uni), ft = rate_fit(tun);
    const double secs = seconds_since(t0);
    return {ordered && ft.slope > fu.slope && secs < 300.0,
            fmt("rate vs |g|: uniform %.3f, tuned %.3f; tuned error <= uniform at every h: %s; %.0f s;", fu.slope,
                ft.slope, ordered ? "yes" : "no", secs) +
                detail};
}

struct MomentCheck {
    double mean, mean_se, var, var_se;
};

MomentCheck sample_moments(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    double m = 0.0;
    for (double x : v) m += x;
    m /= n;
    double m2 = 0.0, m4 = 0.0;
    for (double x : v) {
        const double d = (x - m) * (x - m);
        m2 += d;
        m4 += d * d;
    }
    const double var = m2 / (n - 1.0);
    m4 /= n;
    return {m, std::sqrt(var / n), var, std::sqrt(std::max(m4 - var * var, 0.0) / n)};
}

// Runs n paths and records the smallest value visited by each.
std::vector<double> path_minima(const DiffusionSpec& spec, const Grid& grid, double x0, double t, std::size_t n,
                                std::uint64_t seed, std::vector<double>* terminal) {
    const TransitionTable table = build_table(spec, grid);
    std::vector<double> minima(n);
    if (terminal) terminal->assign(n, 0.0);
    for (std::size_t p = 0; p < n; ++p) {
        RandomStream rs(RngSpec{seed, p});
        std::size_t cur = init_state(spec, grid, x0, rs);
        double lowest = table.points[cur];
        double value_at_t = table.points[cur];
        run_walk(table, cur, t, rs, [&](double time, std::size_t j) {
            if (time <= t) value_at_t = table.points[j];
            lowest = std::min(lowest, table.points[j]);
        });
        minima[p] = lowest;
        if (terminal) (*terminal)[p] = value_at_t;
    }
    return minima;
}

// 7. OU and CIR moments; positivity of CIR and Bessel paths.
Outcome criterion7() {
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool pass = true;
    {
        const DiffusionSpec spec = catalog::ou(1.0, 0.0, 1.0);
        const Grid grid = uniform_grid(spec.domain, 0.01, Interval(-5.0, 6.0, true, true));
        const TransitionTable table = build_table(spec, grid);
        const TerminalBatch b = simulate_terminal(spec, grid, table, 1.0, {1.0}, 100000, 71);
        const MomentCheck m = sample_moments(b.values[0]);
        const double em = std::exp(-1.0), ev = 0.5 * (1.0 - std::exp(-2.0));
        const bool ok = std::abs(m.mean - em) <= 3.0 * m.mean_se && std::abs(m.var - ev) <= 3.0 * m.var_se;
        pass = pass && ok;
        detail += fmt(" OU: mean %.5f (target %.5f, %.2f se), variance %.5f (target %.5f, %.2f se);", m.mean, em,
                      (m.mean - em) / m.mean_se, m.var, ev, (m.var - ev) / m.var_se);
    }
    std::size_t below = 0;
    {
        const DiffusionSpec spec = catalog::cir(5.0, 5.0, 1.0);
        const Grid grid = uniform_grid(spec.domain, 0.01, Interval(0.0, 15.0, true, true));
        std::vector<double> terminal;
        const auto minima = path_minima(spec, grid, 1.0, 1.0, 20000, 72, &terminal);
        for (double v : minima) below += v < 0.0;
        const MomentCheck m = sample_moments(terminal);
        const double em = 5.0 + (1.0 - 5.0) * std::exp(-5.0);
        const bool ok = std::abs(m.mean - em) <= 3.0 * m.mean_se;
        pass = pass && ok;
        detail += fmt(" CIR: mean %.5f (target %.5f, %.2f se), N=20000;", m.mean, em, (m.mean - em) / m.mean_se);
    }
    for (double delta : {1.5, 3.0}) {
        const DiffusionSpec spec = catalog::bessel(delta);
        const Grid grid = uniform_grid(spec.domain, 0.02, Interval(0.0, 8.0, true, true));
        const auto minima = path_minima(spec, grid, 0.5, 1.0, 2000, 73, nullptr);
        for (double v : minima) below += v < 0.0;
    }
    pass = pass && below == 0;
    detail += fmt(" paths below 0 (CIR, Bessel 1.5 and 3): %zu;", below);
    return {pass, fmt("%.0f s;", seconds_since(t0)) + detail};
}

// 8. Stickiness estimation on the graded and the atom-cell grids.
Outcome criterion8() {
    const auto t0 = std::chrono::steady_clock::now();
    const double rho = 1.0, h = 0.01;
    const DiffusionSpec spec = catalog::sticky_bm(rho);
    const Interval window(-6.0, 6.0, true, true);
    StickinessExperiment ex;
    ex.n = 100000;
    ex.n_mc = 500;
    ex.master_seed = 8;

    const Grid g1 = sticky_grid_g1(h, rho, window);
    ex.alphas = {0.5};
    const auto r1 = run_stickiness_experiment(spec, g1, build_table(spec, g1), ex)[0];
    const Grid g0 = sticky_grid_g0(h, rho, window);
    ex.alphas = {0.55};
    const auto r0 = run_stickiness_experiment(spec, g0, build_table(spec, g0), ex)[0];

    const double secs = seconds_since(t0);
    const bool ok1 = !r1.rejected_all && r1.rho_hat_mc >= 0.9 && r1.rho_hat_mc <= 1.15 && r1.rej_count == 0;
    const bool ok0 = r0.rej_count == r0.n_mc;
    return {ok1 && ok0 && secs < 180.0,
            fmt("g1, alpha 0.5: rho_hat %.4f, sigma %.4f, acc %.4g, rej %zu/%zu; g0, alpha 0.55: rej %zu/%zu; %.0f s",
                r1.rho_hat_mc, r1.sigma_mc, r1.acc_hat, r1.rej_count, r1.n_mc, r0.rej_count, r0.n_mc, secs)};
}

// 9. Byte-identical payloads on reruns.
Outcome criterion9() {
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "stmca_acceptance_determinism";
    fs::remove_all(root);
    auto base = [](const std::string& preset, nlohmann::json params) {
        nlohmann::json j;
        j["diffusion"] = {{"preset", preset}, {"params", params}};
        j["grid"] = {{"kind", "uniform"}, {"h", 0.1}, {"window", {-4.0, 4.0}}};
        j["run"] = {{"x0", 0.0}, {"horizons", {0.5, 1.0}}, {"n_paths", 2000}, {"master_seed", 123}, {"dump_paths", 2}};
        return j;
    };
    std::vector<std::pair<std::string, nlohmann::json>> jobs;
    jobs.emplace_back("simulate", base("sticky_bm", {{"rho", 0.7}}));
    jobs.emplace_back("grid", base("ou", nlohmann::json::object()));
    jobs.back().second["grid"]["kind"] = "tuned";
    jobs.emplace_back("moments-dump", base("skew_bm", {{"beta", 0.9}}));
    auto est = base("sticky_bm", {{"rho", 1.0}});
    est["grid"] = {{"kind", "g1"}, {"h", 0.05}, {"window", {-4.0, 4.0}}};
    est["estimator"] = {{"alphas", {0.3, 0.5}}, {"n", 2000}, {"n_mc", 40}};
    jobs.emplace_back("estimate", est);
    auto conv = base("bm", nlohmann::json::object());
    conv["convergence"] = {{"h_list", {0.4, 0.2, 0.1}}, {"p_list", {1.0, 2.0}}, {"n_paths", 2000}};
    jobs.emplace_back("convergence", conv);

    int files = 0, mismatches = 0;
    std::string first;
    for (const auto& [cmd, j] : jobs) {
        const RunConfig cfg = parse_config(j);
        std::vector<CommandResult> runs;
        for (int rep = 0; rep < 3; ++rep) {
            CommandOptions opt;
            opt.out_dir = (root / (cmd + "_" + std::to_string(rep))).string();
            opt.threads = rep == 2 ? 3 : 1;
            runs.push_back(run_command(cmd, cfg, opt));
        }
        for (std::size_t f = 0; f < runs[0].files.size(); ++f) {
            const std::string ref = read_payload(runs[0].files[f]);
            for (int rep = 1; rep < 3; ++rep) {
                ++files;
                if (read_payload(runs[static_cast<std::size_t>(rep)].files.at(f)) != ref) {
                    if (mismatches++ == 0) first = " first: " + runs[0].files[f];
                }
            }
        }
    }
    fs::remove_all(root);
    return {mismatches == 0 && files > 0,
            fmt("%d file comparisons over 5 commands (same seed; 1 and 3 threads), %d differ%s", files, mismatches,
                first.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
    std::setvbuf(stdout, nullptr, _IONBF, 0);
    const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                         criterion6, criterion7, criterion8, criterion9};
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!wanted.empty() && !wanted.count(id)) continue;
        Outcome o;
        try {
            o = criteria[i]();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("criterion %d %s: %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        failed += !o.pass;
    }
    return failed == 0 ? 0 : 1;
}

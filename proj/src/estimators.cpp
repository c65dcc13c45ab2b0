#include "stmca/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "stmca/quadrature.hpp"

namespace stmca {

TestFunction indicator_test_function(double lo, double hi, double height) {
    if (!(lo >= 0.0 && hi > lo && height > 0.0)) throw ParameterError("indicator test function needs 0 <= lo < hi and height > 0");
    TestFunction g;
    g.eval = [lo, hi, height](double x) {
        const double a = std::abs(x);
        return (a > lo && a < hi) ? height : 0.0;
    };
    g.lambda = 2.0 * height * (hi - lo);
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.6g on %.6g < |x| < %.6g", height, lo, hi);
    g.support_note = buf;
    g.null_radius = lo;
    return g;
}

void validate_test_function(const TestFunction& g, double reach, const std::vector<double>& breaks, double tol) {
    if (!g.eval) throw ParameterError("test function has no evaluator");
    if (g.null_radius <= 0.0) throw ParameterError("test function must vanish in a neighborhood of 0");
    std::vector<double> pts{-reach, reach};
    for (double b : breaks) {
        if (b > -reach && b < reach) pts.push_back(b);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) total += quad::integrate_adaptive(g.eval, pts[i], pts[i + 1], 1e-13);
    if (std::abs(total - g.lambda) > tol) throw ParameterError("test function integral does not match lambda");
}

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
}

std::size_t sample_count(std::size_t n, double t) {
    const double nt = static_cast<double>(n) * t;
    const double r = std::round(nt);
    if (std::abs(nt - r) <= 1e-9 * std::max(1.0, r)) return static_cast<std::size_t>(r);
    return static_cast<std::size_t>(std::floor(nt));
}

namespace {

SampleSums collect(const PathRecord& path, std::size_t n, double alpha, const TestFunction& g, double t,
                   double atom) {
    check_alpha(alpha);
    if (n == 0) throw ParameterError("sample count n must be positive");
    if (t > path.horizon && path.times.back() < t) throw DomainError("path horizon is shorter than t");
    const double scale = std::pow(static_cast<double>(n), alpha);
    SampleSums s;
    s.count = sample_count(n, t);
    std::size_t k = 0;
    for (std::size_t i = 0; i < s.count; ++i) {
        const double time = static_cast<double>(i) / static_cast<double>(n);
        while (k + 1 < path.times.size() && path.times[k + 1] <= time) ++k;
        const double x = path.values[k];
        const double v = g.eval(scale * x);
        s.g_sum += v;
        if (v != 0.0) ++s.observed;
        if (x == atom) ++s.at_atom;
    }
    return s;
}

}  // namespace

double local_time_stat(const PathRecord& path, std::size_t n, double alpha, const TestFunction& g, double t) {
    const SampleSums s = collect(path, n, alpha, g, t, 0.0);
    return std::pow(static_cast<double>(n), alpha) / static_cast<double>(n) * s.g_sum;
}

std::optional<double> estimate_from_sums(const SampleSums& sums, std::size_t n, double alpha, double lambda) {
    const double dn = static_cast<double>(n);
    const double L = std::pow(dn, alpha) / dn * sums.g_sum;
    if (!(L > 0.0)) return std::nullopt;
    return 2.0 * lambda / L * (static_cast<double>(sums.at_atom) / dn);
}

std::optional<double> stickiness_estimator(const PathRecord& path, std::size_t n, double alpha,
                                           const TestFunction& g, double t, double atom) {
    return estimate_from_sums(collect(path, n, alpha, g, t, atom), n, alpha, g.lambda);
}

EstimationReport mc_report(const std::vector<std::optional<double>>& estimates, const std::vector<double>& acc_values) {
    if (estimates.empty()) throw ParameterError("no estimates to report");
    EstimationReport r;
    r.n_mc = estimates.size();
    std::vector<double> ok;
    for (const auto& e : estimates) {
        if (e) ok.push_back(*e); else ++r.rej_count;
    }
    if (!acc_values.empty()) {
        double acc = 0.0;
        for (double a : acc_values) acc += a;
        r.acc_hat = acc / static_cast<double>(acc_values.size());
    }
    if (ok.empty()) {
        r.rejected_all = true;
        r.rho_hat_mc = r.s2_mc = r.sigma_mc = std::numeric_limits<double>::quiet_NaN();
        return r;
    }
    double mean = 0.0;
    for (double v : ok) mean += v;
    mean /= static_cast<double>(ok.size());
    double ss = 0.0;
    for (double v : ok) ss += (v - mean) * (v - mean);
    r.rho_hat_mc = mean;
    r.s2_mc = ok.size() > 1 ? ss / static_cast<double>(ok.size() - 1) : 0.0;
    r.sigma_mc = std::sqrt(r.s2_mc);
    return r;
}

std::vector<EstimationReport> run_stickiness_experiment(const DiffusionSpec& spec, const Grid& grid,
                                                        const TransitionTable& table,
                                                        const StickinessExperiment& setup) {
    if (setup.alphas.empty()) throw ParameterError("at least one alpha is required");
    for (double a : setup.alphas) check_alpha(a);
    if (setup.n == 0 || setup.n_mc == 0) throw ParameterError("n and the path count must be positive");
    if (!(setup.t > 0.0)) throw ParameterError("horizon must be positive");
    const std::size_t n_alpha = setup.alphas.size();
    const std::size_t count = sample_count(setup.n, setup.t);
    const double dn = static_cast<double>(setup.n);
    std::vector<double> scales(n_alpha);
    for (std::size_t a = 0; a < n_alpha; ++a) scales[a] = std::pow(dn, setup.alphas[a]);

    std::vector<std::vector<SampleSums>> sums(setup.n_mc, std::vector<SampleSums>(n_alpha));
    parallel_for(setup.n_mc, setup.threads, [&](std::size_t p) {
        RandomStream stream(RngSpec{setup.master_seed, p});
        std::size_t current = init_state(spec, grid, setup.x0, stream);
        std::size_t next = 0;
        auto& mine = sums[p];
        auto take = [&](double x) {
            for (std::size_t a = 0; a < n_alpha; ++a) {
                const double v = setup.g.eval(scales[a] * x);
                mine[a].g_sum += v;
                if (v != 0.0) ++mine[a].observed;
                if (x == setup.atom) ++mine[a].at_atom;
                ++mine[a].count;
            }
        };
        run_walk(table, current, setup.t, stream, [&](double t, std::size_t j) {
            const double x = table.points[current];
            while (next < count && static_cast<double>(next) / dn < t) {
                take(x);
                ++next;
            }
            current = j;
        });
        for (; next < count; ++next) take(table.points[current]);
    });

    std::vector<EstimationReport> reports;
    for (std::size_t a = 0; a < n_alpha; ++a) {
        std::vector<std::optional<double>> est(setup.n_mc);
        std::vector<double> acc(setup.n_mc);
        for (std::size_t p = 0; p < setup.n_mc; ++p) {
            est[p] = estimate_from_sums(sums[p][a], setup.n, setup.alphas[a], setup.g.lambda);
            acc[p] = static_cast<double>(sums[p][a].observed) / static_cast<double>(count);
        }
        reports.push_back(mc_report(est, acc));
    }
    return reports;
}

std::string report_csv_header() { return "alpha,n,rho_hat,s2,sigma,acc,rej_over_n"; }

std::string report_csv_row(double alpha, std::size_t n, const EstimationReport& r) {
    char buf[256];
    const double rej = static_cast<double>(r.rej_count) / static_cast<double>(r.n_mc);
    if (r.rejected_all) {
        std::snprintf(buf, sizeof buf, "%.17g,%zu,,,,%.17g,%.17g", alpha, n, r.acc_hat, rej);
    } else {
        std::snprintf(buf, sizeof buf, "%.17g,%zu,%.17g,%.17g,%.17g,%.17g,%.17g", alpha, n, r.rho_hat_mc, r.s2_mc,
                      r.sigma_mc, r.acc_hat, rej);
    }
    return buf;
}

nlohmann::json report_json(double alpha, std::size_t n, const EstimationReport& r) {
    nlohmann::json j;
    j["alpha"] = alpha;
    j["n"] = n;
    j["n_mc"] = r.n_mc;
    j["rej_count"] = r.rej_count;
    j["acc_hat"] = r.acc_hat;
    j["rejected_all"] = r.rejected_all;
    if (r.rejected_all) {
        j["rho_hat_mc"] = nullptr;
        j["s2_mc"] = nullptr;
        j["sigma_mc"] = nullptr;
    } else {
        j["rho_hat_mc"] = r.rho_hat_mc;
        j["s2_mc"] = r.s2_mc;
        j["sigma_mc"] = r.sigma_mc;
    }
    return j;
}

}  // namespace stmca

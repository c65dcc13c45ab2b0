#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "stmca/grid.hpp"
#include "stmca/measure.hpp"
#include "stmca/walk.hpp"

namespace stmca {

struct TestFunction {
    RealFn eval;
    double lambda = 0.0;       // integral of eval over the real line
    std::string support_note;  // human-readable description of the support
    double null_radius = 0.0;  // eval vanishes on (-null_radius, null_radius)
};

// c * 1{lo < |x| < hi}. The default g = 1{1 < |x| < 5} / 8 has integral 1.
TestFunction indicator_test_function(double lo = 1.0, double hi = 5.0, double height = 0.125);

// Checks lambda against a quadrature of eval over [-reach, reach] with the
// given break points, to absolute tolerance tol. Throws ParameterError.
void validate_test_function(const TestFunction& g, double reach, const std::vector<double>& breaks,
                            double tol = 1e-10);

void check_alpha(double alpha);

// (n^alpha / n) sum_{i=1}^{floor(n t)} g(n^alpha X_{(i-1)/n}).
double local_time_stat(const PathRecord& path, std::size_t n, double alpha, const TestFunction& g, double t);

// 2 lambda(g) / L * (1/n) #{i : X_{(i-1)/n} = atom}; empty when L = 0.
std::optional<double> stickiness_estimator(const PathRecord& path, std::size_t n, double alpha,
                                           const TestFunction& g, double t, double atom = 0.0);

// Sums collected from the samples X_{(i-1)/n}, i = 1..count.
struct SampleSums {
    double g_sum = 0.0;          // sum of g(n^alpha X)
    std::size_t observed = 0;    // samples with g(n^alpha X) != 0
    std::size_t at_atom = 0;     // samples equal to the atom
    std::size_t count = 0;
};

std::size_t sample_count(std::size_t n, double t);

// Per-path estimate from sums; empty (rejection) when the statistic is 0.
std::optional<double> estimate_from_sums(const SampleSums& sums, std::size_t n, double alpha, double lambda);

struct EstimationReport {
    double rho_hat_mc = 0.0;  // NaN when every path was rejected
    double s2_mc = 0.0;
    double sigma_mc = 0.0;
    double acc_hat = 0.0;
    std::size_t rej_count = 0;
    std::size_t n_mc = 0;
    bool rejected_all = false;
};

// Mean and unbiased variance (divisor count - 1) over the accepted estimates;
// acc_hat is the mean of acc_values.
EstimationReport mc_report(const std::vector<std::optional<double>>& estimates, const std::vector<double>& acc_values);

struct StickinessExperiment {
    std::vector<double> alphas;
    std::size_t n = 100000;
    double t = 1.0;
    std::size_t n_mc = 500;
    double atom = 0.0;
    TestFunction g = indicator_test_function();
    double x0 = 0.0;
    std::uint64_t master_seed = 0;
    int threads = 1;
};

// Simulates n_mc paths (path p uses stream (master_seed, p)) and evaluates
// every alpha on the same paths while they are generated.
std::vector<EstimationReport> run_stickiness_experiment(const DiffusionSpec& spec, const Grid& grid,
                                                        const TransitionTable& table,
                                                        const StickinessExperiment& setup);

// CSV columns alpha,n,rho_hat,s2,sigma,acc,rej_over_n; "not available"
// entries of an all-rejected row are left empty.
std::string report_csv_header();
std::string report_csv_row(double alpha, std::size_t n, const EstimationReport& r);
nlohmann::json report_json(double alpha, std::size_t n, const EstimationReport& r);

}  // namespace stmca

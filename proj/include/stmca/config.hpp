#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "stmca/grid.hpp"
#include "stmca/measure.hpp"
#include "stmca/moments.hpp"

namespace stmca {

struct SdeBlock {
    std::string drift;
    std::string diffusivity;
    double lower = -kInf;
    double upper = kInf;
    bool lower_closed = false;
    bool upper_closed = false;
    double anchor = 0.0;
    std::vector<Atom> atoms;
    std::string left_boundary = "unreachable";
    std::string right_boundary = "unreachable";
};

struct DiffusionBlock {
    std::string preset;  // empty when `sde` is set
    std::map<std::string, double> params;
    std::optional<SdeBlock> sde;
};

// kind: uniform | tuned | file | g0 | g1. For the sticky_bm preset "tuned"
// is the closed-form sticky grid; otherwise the numerically tuned grid
// started at run.x0.
struct GridBlock {
    std::string kind = "uniform";
    double h = 0.01;
    double window_lo = -5.0;
    double window_hi = 5.0;
    double anchor = 0.0;
    std::string path;  // kind == file
};

struct RunBlock {
    double x0 = 0.0;
    std::vector<double> horizons{1.0};
    std::size_t n_paths = 1000;
    std::uint64_t master_seed = 0;
    std::string method = "quadrature";  // or closed_form
    int quad_panels = 16;
    std::size_t dump_paths = 0;  // number of full paths written as CSV
    int histogram_bins = 100;
};

struct OutputBlock {
    std::string directory = "out";
};

struct EstimatorBlock {
    std::vector<double> alphas{0.5};
    std::size_t n = 100000;
    std::size_t n_mc = 500;
    double t = 1.0;
    double g_lo = 1.0;
    double g_hi = 5.0;
    double g_height = 0.125;
};

struct ConvergenceBlock {
    std::vector<double> h_list;
    std::vector<double> p_list{1.0};
    std::vector<std::string> grid_kinds{"uniform"};
    double t = 1.0;
    std::size_t n_paths = 10000;
    std::string reference = "kernel";  // or fine
    double fine_h = 0.0;
    // (metric, error) pairs fitted directly instead of simulating.
    std::vector<std::pair<double, double>> points;
};

struct RunConfig {
    DiffusionBlock diffusion;
    GridBlock grid;
    RunBlock run;
    OutputBlock output;
    std::optional<EstimatorBlock> estimator;
    std::optional<ConvergenceBlock> convergence;
};

// Throws ConfigError carrying the JSON path of the offending field.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
nlohmann::json to_json(const RunConfig& config);

DiffusionSpec build_diffusion(const DiffusionBlock& block);
Grid build_grid(const RunConfig& config, const DiffusionSpec& spec, const std::string& kind, double h);
Method parse_method(const std::string& name);

}  // namespace stmca

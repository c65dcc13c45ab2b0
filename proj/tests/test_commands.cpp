#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "stmca/commands.hpp"
#include "stmca/error.hpp"

using namespace stmca;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("stmca_test_commands_" + name);
    fs::remove_all(p);
    return p;
}

json base_config() {
    return json::parse(R"({"diffusion": {"preset": "sticky_bm", "params": {"rho": 0.7}},
                          "grid": {"kind": "tuned", "h": 0.1, "window": [-4, 4]},
                          "run": {"x0": 0.0, "horizons": [1.0], "n_paths": 500, "master_seed": 3,
                                  "dump_paths": 1, "histogram_bins": 20}})");
}

std::string name_of(const std::string& path) { return fs::path(path).filename().string(); }

}  // namespace

TEST(Commands, SimulateWritesExpectedFiles) {
    CommandOptions opt;
    opt.out_dir = scratch("simulate").string();
    const CommandResult r = cmd_simulate(parse_config(base_config()), opt);
    std::set<std::string> names;
    for (const auto& f : r.files) names.insert(name_of(f));
    EXPECT_TRUE(names.count("terminal_values.csv"));
    EXPECT_TRUE(names.count("summary.json"));
    EXPECT_TRUE(names.count("path_000000.csv"));
    const json summary = json::parse(read_payload(opt.out_dir.value() + "/summary.json"));
    EXPECT_TRUE(summary.contains("config"));
    std::ifstream in(opt.out_dir.value() + "/terminal_values.csv");
    std::string header_line;
    std::getline(in, header_line);
    EXPECT_EQ(header_line.rfind("# stmca simulate", 0), 0u);
}

TEST(Commands, SingleCaseRunTwiceIsIdentical) {
    json j = base_config();
    j["run"]["n_paths"] = 1;
    const RunConfig c = parse_config(j);
    CommandOptions a, b;
    a.out_dir = scratch("twice_a").string();
    b.out_dir = scratch("twice_b").string();
    const auto ra = cmd_simulate(c, a), rb = cmd_simulate(c, b);
    ASSERT_EQ(ra.files.size(), rb.files.size());
    for (std::size_t i = 0; i < ra.files.size(); ++i) EXPECT_EQ(read_payload(ra.files[i]), read_payload(rb.files[i]));
}

TEST(Commands, SeedOverrideChangesOutput) {
    const RunConfig c = parse_config(base_config());
    CommandOptions a, b;
    a.out_dir = scratch("seed_a").string();
    b.out_dir = scratch("seed_b").string();
    b.seed = 99;
    cmd_simulate(c, a);
    cmd_simulate(c, b);
    EXPECT_NE(read_payload(*a.out_dir + "/terminal_values.csv"), read_payload(*b.out_dir + "/terminal_values.csv"));
}

TEST(Commands, GridFileRoundTrip) {
    json j = base_config();
    j["diffusion"] = {{"preset", "cir"}, {"params", {{"theta", 5.0}, {"mu", 5.0}, {"sigma", 1.0}}}};
    j["grid"] = {{"kind", "tuned"}, {"h", 0.01}, {"window", {0.05, 15.0}}};
    j["run"]["x0"] = 1.0;
    CommandOptions opt;
    opt.out_dir = scratch("grid").string();
    cmd_grid(parse_config(j), opt);
    const json m = json::parse(read_payload(*opt.out_dir + "/grid_metrics.json"));
    EXPECT_LE(m["x_norm"].get<double>(), 8.0 * 0.01 * 0.01);

    j["grid"] = {{"kind", "file"}, {"path", *opt.out_dir + "/grid.csv"}, {"window", {0.05, 15.0}}};
    CommandOptions again;
    again.out_dir = scratch("grid_again").string();
    cmd_grid(parse_config(j), again);
    EXPECT_EQ(read_payload(*opt.out_dir + "/grid.csv"), read_payload(*again.out_dir + "/grid.csv"));
}

TEST(Commands, MomentsDump) {
    json j = base_config();
    j["diffusion"] = {{"preset", "skew_bm"}, {"params", {{"beta", 0.9}}}};
    j["grid"] = {{"kind", "uniform"}, {"h", 0.5}, {"window", {-1, 1}}};
    CommandOptions opt;
    opt.out_dir = scratch("cells").string();
    cmd_moments_dump(parse_config(j), opt);
    std::istringstream rows(read_payload(*opt.out_dir + "/cells.csv"));
    std::string line;
    int count = 0;
    while (std::getline(rows, line)) ++count;
    EXPECT_EQ(count, 1 + 3);
}

TEST(Commands, EstimateAllRejectedRow) {
    json j = base_config();
    j["diffusion"]["params"]["rho"] = 1.0;
    j["grid"] = {{"kind", "g0"}, {"h", 0.01}, {"window", {-6, 6}}};
    j["estimator"] = {{"alphas", {0.55}}, {"n", 100000}, {"n_mc", 3}};
    CommandOptions opt;
    opt.out_dir = scratch("estimate").string();
    cmd_estimate(parse_config(j), opt);
    const std::string csv = read_payload(*opt.out_dir + "/estimates.csv");
    EXPECT_NE(csv.find(",100000,,,,"), std::string::npos) << csv;
    const json e = json::parse(read_payload(*opt.out_dir + "/estimates.json"));
    EXPECT_TRUE(e["rows"][0]["rejected_all"].get<bool>());
}

TEST(Commands, EstimateNeedsAnAtom) {
    json j = base_config();
    j["diffusion"] = {{"preset", "bm"}, {"params", json::object()}};
    j["grid"]["kind"] = "uniform";
    j["estimator"] = {{"alphas", {0.5}}, {"n", 100}, {"n_mc", 2}};
    CommandOptions opt;
    opt.out_dir = scratch("estimate_bm").string();
    EXPECT_THROW(cmd_estimate(parse_config(j), opt), ConfigError);
}

TEST(Commands, ConvergenceSyntheticPoints) {
    json j = base_config();
    j["convergence"] = {{"points", {{0.01, 0.1}, {0.04, 0.2}, {0.16, 0.4}}}};
    CommandOptions opt;
    opt.out_dir = scratch("conv").string();
    cmd_convergence(parse_config(j), opt);
    const json r = json::parse(read_payload(*opt.out_dir + "/convergence.json"));
    EXPECT_NEAR(r["fit"]["slope"].get<double>(), 0.5, 1e-12);
}

TEST(Commands, ConvergenceBothAxes) {
    json j = base_config();
    j["diffusion"] = {{"preset", "bm"}, {"params", json::object()}};
    j["grid"]["kind"] = "uniform";
    j["convergence"] = {{"h_list", {0.4, 0.2, 0.1}}, {"n_paths", 4000}};
    CommandOptions opt;
    opt.out_dir = scratch("conv_bm").string();
    cmd_convergence(parse_config(j), opt);
    const json r = json::parse(read_payload(*opt.out_dir + "/convergence.json"));
    const json& fits = r["grids"]["uniform"]["fits"]["p=1"];
    EXPECT_TRUE(fits.contains("vs_x_norm"));
    EXPECT_TRUE(fits.contains("vs_max_cell"));
    EXPECT_GT(fits["vs_max_cell"]["slope"].get<double>(), 0.0);
}

TEST(Commands, UnknownCommand) {
    EXPECT_THROW(run_command("bogus", parse_config(base_config()), {}), ConfigError);
}

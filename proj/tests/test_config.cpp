#include <gtest/gtest.h>

#include <cmath>

#include "stmca/config.hpp"
#include "stmca/error.hpp"
#include "stmca/expression.hpp"

using namespace stmca;
using nlohmann::json;

TEST(Expression, Arithmetic) {
    EXPECT_DOUBLE_EQ(Expression::parse("1 + 2 * 3")(0.0), 7.0);
    EXPECT_DOUBLE_EQ(Expression::parse("2 ^ 3 ^ 2")(0.0), 512.0);
    EXPECT_DOUBLE_EQ(Expression::parse("-x^2")(3.0), -9.0);
    EXPECT_DOUBLE_EQ(Expression::parse("(1 - x) / 2")(0.5), 0.25);
    EXPECT_NEAR(Expression::parse("exp(log(x)) + sqrt(abs(-4)) + pi - e")(2.5), 4.5 + M_PI - M_E, 1e-15);
    EXPECT_DOUBLE_EQ(Expression::parse("1.5e-1*x")(2.0), 0.3);
}

TEST(Expression, Errors) {
    EXPECT_THROW(Expression::parse("1 +"), ParameterError);
    EXPECT_THROW(Expression::parse("foo(x)"), ParameterError);
    EXPECT_THROW(Expression::parse("(x"), ParameterError);
    EXPECT_THROW(Expression::parse("x y"), ParameterError);
}

namespace {
json minimal() {
    return json::parse(R"({"diffusion": {"preset": "sticky_bm", "params": {"rho": 0.7}},
                          "grid": {"kind": "tuned", "h": 0.05, "window": [-3, 3]},
                          "run": {"x0": 0.0, "horizons": [1.0], "n_paths": 100, "master_seed": 7}})");
}
}  // namespace

TEST(Config, ParsesAndRoundTrips) {
    const RunConfig c = parse_config(minimal());
    EXPECT_EQ(c.diffusion.preset, "sticky_bm");
    EXPECT_DOUBLE_EQ(c.diffusion.params.at("rho"), 0.7);
    EXPECT_EQ(c.grid.kind, "tuned");
    EXPECT_EQ(c.run.master_seed, 7u);
    const json once = to_json(c);
    EXPECT_EQ(to_json(parse_config(once)), once);
}

TEST(Config, SdeRoundTrip) {
    json j = json::parse(R"({"diffusion": {"sde": {"drift": "-x", "diffusivity": "1 + 0.1*x",
                              "lower": 0, "upper": "inf", "lower_closed": true, "anchor": 1,
                              "left_boundary": "reflecting"}},
                             "grid": {"kind": "uniform", "h": 0.1, "window": [0, 4]},
                             "run": {"x0": 1.0}})");
    const RunConfig c = parse_config(j);
    ASSERT_TRUE(c.diffusion.sde.has_value());
    EXPECT_TRUE(std::isinf(c.diffusion.sde->upper));
    const json once = to_json(c);
    EXPECT_EQ(to_json(parse_config(once)), once);
    const DiffusionSpec spec = build_diffusion(c.diffusion);
    EXPECT_EQ(spec.left_boundary.kind, BoundaryKind::reflecting);
}

TEST(Config, RejectsUnknownFieldsWithPath) {
    json j = minimal();
    j["run"]["n_pathz"] = 3;
    try {
        parse_config(j);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("run.n_pathz"), std::string::npos);
    }
}

TEST(Config, Validation) {
    json j = minimal();
    j["estimator"] = {{"alphas", {1.2}}};
    EXPECT_THROW(parse_config(j), ConfigError);
    j = minimal();
    j["convergence"] = {{"h_list", {0.1, 0.05}}};
    EXPECT_THROW(parse_config(j), ConfigError);
    j = minimal();
    j["diffusion"]["preset"] = "nope";
    EXPECT_THROW(parse_config(j), ConfigError);
    j = minimal();
    j["run"]["x0"] = 10.0;
    EXPECT_THROW(parse_config(j), ConfigError);
    j = minimal();
    j["grid"]["h"] = -1.0;
    EXPECT_THROW(parse_config(j), ConfigError);
}

TEST(Config, BuildGridKinds) {
    const RunConfig c = parse_config(minimal());
    const DiffusionSpec spec = build_diffusion(c.diffusion);
    const Grid tuned = build_grid(c, spec, "tuned", 0.05);
    EXPECT_NEAR(*std::upper_bound(tuned.points().begin(), tuned.points().end(), 0.0), 0.0025 / 1.4, 1e-15);
    const Grid uni = build_grid(c, spec, "uniform", 0.5);
    EXPECT_EQ(uni.size(), 13u);
    EXPECT_EQ(parse_method("closed_form"), Method::closed_form);
    EXPECT_THROW(parse_method("magic"), ConfigError);
}

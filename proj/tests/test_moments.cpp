#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "stmca/catalog.hpp"
#include "stmca/error.hpp"
#include "stmca/moments.hpp"

using namespace stmca;

namespace {
double bm_v1(double a, double x, double b) { return (x - a) * (b - x) * (b + x - 2.0 * a) / (3.0 * (b - a)); }
}  // namespace

TEST(V0, Examples) {
    EXPECT_DOUBLE_EQ(v0(catalog::bm(), 0.0, 1.0, 2.0), 0.5);
    EXPECT_DOUBLE_EQ(v0(catalog::bm(), 0.0, 0.0, 2.0), 0.0);
    EXPECT_DOUBLE_EQ(v0(catalog::bm(), 0.0, 2.0, 2.0), 1.0);
    const double h = 0.01;
    EXPECT_NEAR(v0(catalog::skew_bm(0.9), -h, 0.0, h), 0.9, 1e-12);
}

TEST(Green, Examples) {
    const GreenEvaluator ge(0.0, 2.0, ScaleFunction::identity());
    EXPECT_DOUBLE_EQ(green(ge, 1.0, 1.0), 0.5);
    EXPECT_DOUBLE_EQ(green(ge, 1.3, 0.0), 0.0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int i = 0; i < 50; ++i) {
        const double x = u(rng), y = u(rng);
        EXPECT_DOUBLE_EQ(green(ge, x, y), green(ge, y, x));
    }
    EXPECT_THROW(green(ge, 2.5, 1.0), DomainError);
}

TEST(VkQuadrature, BrownianMidpoint) {
    EXPECT_NEAR(vk_quadrature(catalog::bm(), 0.0, 0.5, 1.0, 1, 16), 0.125, 1e-8);
}

TEST(VkQuadrature, StickyCenter) {
    const double eps = 0.05, rho = 0.7;
    EXPECT_NEAR(vk_quadrature(catalog::sticky_bm(rho), -eps, 0.0, eps, 1, 16), eps * eps / 2.0 + rho * eps / 4.0,
                1e-14);
}

TEST(VkQuadrature, VanishesAtEndpoints) {
    const DiffusionSpec spec = catalog::ou(1.0, 0.0, 1.0);
    for (int k = 1; k <= 3; ++k) {
        EXPECT_NEAR(vk_quadrature(spec, -0.5, -0.5, 0.7, k, 16), 0.0, 1e-15);
        EXPECT_NEAR(vk_quadrature(spec, -0.5, 0.7, 0.7, k, 16), 0.0, 1e-15);
    }
}

TEST(CellQuantities, BrownianUnitCell) {
    for (Method m : {Method::closed_form, Method::quadrature}) {
        const CellQuantities q = cell_quantities(catalog::bm(), 0.0, 0.5, 1.0, m);
        EXPECT_NEAR(q.p_plus, 0.5, 1e-14);
        EXPECT_NEAR(q.t_plus, 0.25, 1e-12);
        EXPECT_NEAR(q.t_minus, 0.25, 1e-12);
    }
}

TEST(CellQuantities, SkewBrownianMomentsOnSymmetricCell) {
    // On a cell symmetric around the skew point the exit time is that of
    // Brownian motion; the split between v1 and v1_bar follows beta.
    const double beta = 0.9, h = 0.1;
    const CellQuantities q = cell_quantities(catalog::skew_bm(beta), -h, 0.0, h, Method::quadrature);
    EXPECT_NEAR(q.mean_exit(), h * h, 1e-14);
    EXPECT_NEAR(q.v1, beta * h * h, 1e-14);
    EXPECT_NEAR(q.p_plus, beta, 1e-14);
    const CellQuantities c = cell_quantities(catalog::skew_bm(beta), -h, 0.0, h, Method::closed_form);
    EXPECT_NEAR(c.v1, q.v1, 1e-14);
    EXPECT_NEAR(c.v1_bar, q.v1_bar, 1e-14);
}

TEST(CellQuantities, OuSymmetricMidpoint) {
    const CellQuantities q = cell_quantities(catalog::ou(1.0, 0.5, 1.0), 0.2, 0.5, 0.8);
    EXPECT_NEAR(q.p_plus, 0.5, 1e-12);
    EXPECT_NEAR(q.t_plus, q.t_minus, 1e-12);
}

TEST(CellQuantities, ClosedFormRequiresCatalog) {
    DiffusionSpec spec = catalog::bm();
    spec.catalog_id.clear();
    EXPECT_THROW(cell_quantities(spec, 0.0, 0.5, 1.0, Method::closed_form), UnsupportedError);
}

TEST(CellQuantities, ClosedFormAgreesWithQuadrature) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::vector<DiffusionSpec> specs{catalog::bm(), catalog::sticky_bm(0.7), catalog::skew_bm(0.3),
                                           catalog::bessel(3.0), catalog::skew_bessel(1.5, 0.7)};
    for (const auto& spec : specs) {
        for (int i = 0; i < 30; ++i) {
            const double w = 0.01 + 0.5 * u(rng);
            const double a = (spec.domain.lower == 0.0 ? 0.05 : -w * u(rng)) + 0.3 * u(rng);
            const double b = a + w, x = a + w * (0.1 + 0.8 * u(rng));
            const CellQuantities c = cell_quantities(spec, a, x, b, Method::closed_form);
            const CellQuantities q = cell_quantities(spec, a, x, b, Method::quadrature, 512);
            const double xi = scale_speed_product(spec, a, b);
            EXPECT_LE(std::abs(c.v1 - q.v1), 1e-7 * std::max(q.v1, xi)) << spec.catalog_id;
            EXPECT_LE(std::abs(c.v1_bar - q.v1_bar), 1e-7 * std::max(q.v1_bar, xi)) << spec.catalog_id;
        }
    }
}

TEST(CellQuantities, MatchesBrownianClosedForm) {
    EXPECT_NEAR(cell_quantities(catalog::bm(), -0.3, 0.1, 0.4).v1, bm_v1(-0.3, 0.1, 0.4), 1e-15);
}

TEST(MomentBounds, RatioAndFactorial) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::vector<DiffusionSpec> specs{catalog::bm(), catalog::sticky_bm(1.0), catalog::ou(1.0, 0.0, 1.0)};
    for (const auto& spec : specs) {
        for (int i = 0; i < 20; ++i) {
            const double a = -1.0 + u(rng), b = a + 0.01 + u(rng), x = a + (b - a) * u(rng);
            const double xi = scale_speed_product(spec, a, b, 32);
            const MomentProfile p = moment_profile(spec, a, x, b, 3, 32);
            double fact = 1.0;
            for (int k = 1; k <= 3; ++k) {
                fact *= k;
                EXPECT_LE(p.v[k], k * xi * p.v[k - 1] * (1 + 1e-10));
                EXPECT_LE(p.v[k], fact * std::pow(xi, k) * (1 + 1e-10));
            }
        }
    }
}

TEST(MeanExit, SumOfConditionalMoments) {
    const DiffusionSpec spec = catalog::sticky_bm(0.4);
    const CellQuantities q = cell_quantities(spec, -0.2, 0.05, 0.3);
    const double closed = 0.25 * 0.25 + 0.4 * (0.0 + 0.2) * (0.3 - 0.05) / 0.5;
    EXPECT_NEAR(q.mean_exit(), closed, 1e-13);
    EXPECT_NEAR(mean_exit_time(spec, -0.2, 0.05, 0.3), closed, 1e-13);
}

TEST(ReflectingJump, Examples) {
    EXPECT_NEAR(reflecting_jump(catalog::reflected_bm(), 0.0, 0.1), 0.01, 1e-14);
    DiffusionSpec sticky_wall = catalog::reflected_bm();
    sticky_wall.speed = SpeedMeasure([](double) { return 2.0; }, {{0.0, 0.5}});
    const double h = 0.1;
    EXPECT_NEAR(reflecting_jump(sticky_wall, 0.0, h), h * h + 0.5 * h, 1e-14);
    EXPECT_LT(reflecting_jump(catalog::reflected_bm(), 0.0, 1e-6), 1e-11);
    EXPECT_THROW(reflecting_jump(catalog::bm(), 0.0, 0.1), ContractError);
}

TEST(GeneratorResidual, OuHarmonicConverges) {
    const DiffusionSpec spec = catalog::ou(1.0, 0.0, 1.0);
    auto u = [&](double x) { return v0(spec, -0.5, x, 0.8); };
    auto zero = [](double) { return 0.0; };
    const double r1 = generator_residual(spec, -0.5, 0.0, 0.8, u, zero, 1e-2);
    const double r2 = generator_residual(spec, -0.5, 0.0, 0.8, u, zero, 5e-3);
    EXPECT_LT(r2, r1);
    EXPECT_LT(r2, 1e-3);
}

TEST(GeneratorResidual, BrownianV1) {
    const DiffusionSpec spec = from_sde([](double) { return 0.0; }, [](double) { return 1.0; }, Interval(), 0.0);
    auto u = [](double x) { return bm_v1(0.0, x, 1.0); };
    auto rhs = [](double x) { return -x; };
    EXPECT_LE(generator_residual(spec, 0.0, 0.5, 1.0, u, rhs, 1e-3), 1e-4);
    auto lin = [](double x) { return 2.0 * x + 1.0; };
    EXPECT_NEAR(generator_residual(spec, 0.0, 0.5, 1.0, lin, [](double) { return 0.0; }, 1e-3), 0.0, 1e-9);
}

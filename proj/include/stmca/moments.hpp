#pragma once

#include <iosfwd>
#include <vector>

#include "stmca/measure.hpp"

namespace stmca {

struct CellQuantities {
    double a = 0.0;
    double x = 0.0;
    double b = 0.0;
    double v0 = 0.0;
    double v1 = 0.0;
    double v1_bar = 0.0;
    double p_plus = 0.0;
    double p_minus = 0.0;
    double t_plus = 0.0;
    double t_minus = 0.0;
    // Set when the corresponding branch has probability below 1e-12; its
    // time is then the unconditional mean exit time.
    bool one_sided_plus = false;
    bool one_sided_minus = false;

    double mean_exit() const { return v1 + v1_bar; }
};

class GreenEvaluator {
public:
    GreenEvaluator(double a, double b, ScaleFunction scale);
    double a() const { return a_; }
    double b() const { return b_; }
    const ScaleFunction& scale() const { return scale_; }
    double operator()(double x, double y) const;

private:
    double a_, b_;
    ScaleFunction scale_;
    double sa_, sb_;
};

double green(const GreenEvaluator& ge, double x, double y);

double v0(const DiffusionSpec& spec, double a, double x, double b);

enum class MomentBase { upper, lower };  // v_k (exit at b) or v-bar_k (exit at a)
enum class Method { closed_form, quadrature };

// k-th conditional exit-time moment by iterating the discretized Green
// operator k times, starting from v0 (upper) or 1 - v0 (lower).
double vk_quadrature(const DiffusionSpec& spec, double a, double x, double b, int k, int n_panels,
                     MomentBase base = MomentBase::upper);

struct MomentProfile {
    std::vector<double> v;      // v_0 .. v_kmax at x
    std::vector<double> v_bar;  // v-bar_0 .. v-bar_kmax at x
    double mean_exit = 0.0;     // integral of G(x, .) dm
};

MomentProfile moment_profile(const DiffusionSpec& spec, double a, double x, double b, int kmax, int n_panels);

// E_x of the exit time from (a, b), i.e. the Green integral of the speed measure.
double mean_exit_time(const DiffusionSpec& spec, double a, double x, double b, int n_panels = 64);

CellQuantities cell_quantities(const DiffusionSpec& spec, double a, double x, double b,
                               Method method = Method::quadrature, int quad_panels = 64);

// True when closed formulas exist for this spec's v0 or v1 (see cell_quantities).
bool has_closed_form(const DiffusionSpec& spec);

// Time of the deterministic jump from a reflecting endpoint to its neighbor b:
// the integral over [boundary, b) of |s(b) - s(z)| m(dz), atom at the boundary included.
double reflecting_jump(const DiffusionSpec& spec, double boundary, double b, int n_panels = 64);
// Same integral without requiring `from` to be a reflecting endpoint.
double one_sided_jump_time(const DiffusionSpec& spec, double from, double to, int n_panels = 64);

// max over samples in (a, b) of |mu u' + sigma^2 u'' / 2 - rhs| by central differences.
double generator_residual(const DiffusionSpec& spec, double a, double x, double b, const RealFn& u,
                          const RealFn& rhs, double h_fd, int samples = 101);

void write_cell_csv(std::ostream& out, const std::vector<CellQuantities>& cells);

}  // namespace stmca

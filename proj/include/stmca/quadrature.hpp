#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "stmca/error.hpp"

namespace stmca::quad {

inline constexpr int kOrder = 10;

using NodeVector = Eigen::Matrix<double, kOrder, 1>;
using NodeMatrix = Eigen::Matrix<double, kOrder, kOrder>;

// Gauss-Legendre rule on [-1, 1] together with its spectral integration
// matrix: (cumulative * f)(i) approximates the integral of f from -1 to
// nodes(i), exact for polynomials of degree < kOrder.
struct Rule {
    NodeVector nodes;
    NodeVector weights;
    NodeMatrix cumulative;
};

const Rule& gauss_legendre();

struct Panel {
    double lo;
    double hi;
    double half_width() const { return 0.5 * (hi - lo); }
    double mid() const { return 0.5 * (hi + lo); }
};

struct PartitionOptions {
    int panels = 32;         // target panel count over the whole range
    int graded_levels = 20;  // geometric levels toward a graded breakpoint
    double grading_ratio = 0.5;
};

// Splits [breaks.front(), breaks.back()] into panels that never straddle a
// breakpoint. Segments adjacent to a point listed in `graded` get their
// first (or last) panel refined geometrically toward that point.
std::vector<Panel> partition(std::span<const double> breaks, std::span<const double> graded,
                             const PartitionOptions& options);

template <class F>
double integrate(F&& f, std::span<const Panel> panels) {
    const Rule& rule = gauss_legendre();
    double total = 0.0;
    for (const Panel& p : panels) {
        const double hw = p.half_width();
        const double mid = p.mid();
        double acc = 0.0;
        for (int i = 0; i < kOrder; ++i) acc += rule.weights(i) * f(mid + hw * rule.nodes(i));
        total += hw * acc;
    }
    return total;
}

// Composite rule on [a, b] with `panels` uniform panels, optionally graded
// toward either endpoint.
double integrate(const std::function<double(double)>& f, double a, double b, int panels,
                 bool grade_lo = false, bool grade_hi = false);

// Adaptive Gauss-Kronrod. Non-finite integrand values or an error estimate
// above `tolerance` (relative) raise QuadratureError.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double tolerance = 1e-12);

bool same_point(double x, double y);

}  // namespace stmca::quad

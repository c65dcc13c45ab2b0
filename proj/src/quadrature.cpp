#include "stmca/quadrature.hpp"

#include <Eigen/LU>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <limits>

namespace stmca::quad {

namespace {

// Legendre polynomials P_0..P_n at t by the three-term recurrence.
std::array<double, kOrder + 2> legendre_values(double t) {
    std::array<double, kOrder + 2> p{};
    p[0] = 1.0;
    p[1] = t;
    for (int j = 1; j + 1 < static_cast<int>(p.size()); ++j)
        p[j + 1] = ((2.0 * j + 1.0) * t * p[j] - j * p[j - 1]) / (j + 1.0);
    return p;
}

Rule build_rule() {
    using boost_rule = boost::math::quadrature::gauss<double, kOrder>;
    const auto& abscissa = boost_rule::abscissa();
    const auto& weights = boost_rule::weights();
    static_assert(kOrder % 2 == 0, "even order keeps the node set symmetric without a zero node");

    Rule rule;
    const int half = kOrder / 2;
    for (int i = 0; i < half; ++i) {
        rule.nodes(half - 1 - i) = -abscissa[i];
        rule.weights(half - 1 - i) = weights[i];
        rule.nodes(half + i) = abscissa[i];
        rule.weights(half + i) = weights[i];
    }

    // cumulative = Q * V^{-1}: V maps Legendre coefficients to nodal values,
    // Q integrates each Legendre polynomial from -1 up to every node.
    NodeMatrix vandermonde;
    NodeMatrix integrals;
    for (int i = 0; i < kOrder; ++i) {
        const auto p = legendre_values(rule.nodes(i));
        for (int j = 0; j < kOrder; ++j) {
            vandermonde(i, j) = p[j];
            integrals(i, j) = j == 0 ? rule.nodes(i) + 1.0 : (p[j + 1] - p[j - 1]) / (2.0 * j + 1.0);
        }
    }
    rule.cumulative = integrals * vandermonde.partialPivLu().inverse();
    return rule;
}

void append_graded(std::vector<Panel>& out, double lo, double hi, bool toward_lo,
                   const PartitionOptions& options) {
    // [lo, hi] is one uniform panel; refine geometrically toward one end.
    const double width = hi - lo;
    std::vector<double> cuts;
    double frac = 1.0;
    for (int level = 0; level < options.graded_levels; ++level) {
        frac *= options.grading_ratio;
        cuts.push_back(frac);
    }
    std::vector<double> pts;
    pts.push_back(0.0);
    for (auto it = cuts.rbegin(); it != cuts.rend(); ++it) pts.push_back(*it);
    pts.push_back(1.0);
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        if (toward_lo) {
            out.push_back({lo + width * pts[k], lo + width * pts[k + 1]});
        }
    }
    if (!toward_lo) {
        for (std::size_t k = pts.size() - 1; k > 0; --k)
            out.push_back({hi - width * pts[k], hi - width * pts[k - 1]});
    }
}

}  // namespace

const Rule& gauss_legendre() {
    static const Rule rule = build_rule();
    return rule;
}

bool same_point(double x, double y) {
    return std::abs(x - y) <= 1e-14 * std::max(1.0, std::max(std::abs(x), std::abs(y)));
}

std::vector<Panel> partition(std::span<const double> breaks, std::span<const double> graded,
                             const PartitionOptions& options) {
    std::vector<Panel> panels;
    if (breaks.size() < 2) return panels;
    const double total = breaks.back() - breaks.front();
    auto is_graded = [&](double x) {
        return std::any_of(graded.begin(), graded.end(), [&](double g) { return same_point(g, x); });
    };
    for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
        const double lo = breaks[s];
        const double hi = breaks[s + 1];
        if (!(hi > lo)) continue;
        const long n = std::max(1L, std::lround(options.panels * (hi - lo) / total));
        const double step = (hi - lo) / static_cast<double>(n);
        const bool grade_lo = is_graded(lo);
        const bool grade_hi = is_graded(hi);
        for (long k = 0; k < n; ++k) {
            const double plo = lo + step * static_cast<double>(k);
            const double phi = k + 1 == n ? hi : lo + step * static_cast<double>(k + 1);
            if (k == 0 && grade_lo && n == 1 && grade_hi) {
                const double mid = 0.5 * (plo + phi);
                append_graded(panels, plo, mid, true, options);
                append_graded(panels, mid, phi, false, options);
            } else if (k == 0 && grade_lo) {
                append_graded(panels, plo, phi, true, options);
            } else if (k + 1 == n && grade_hi) {
                append_graded(panels, plo, phi, false, options);
            } else {
                panels.push_back({plo, phi});
            }
        }
    }
    return panels;
}

double integrate(const std::function<double(double)>& f, double a, double b, int panels,
                 bool grade_lo, bool grade_hi) {
    std::array<double, 2> breaks{a, b};
    std::vector<double> graded;
    if (grade_lo) graded.push_back(a);
    if (grade_hi) graded.push_back(b);
    PartitionOptions options;
    options.panels = panels;
    const auto parts = partition(breaks, graded, options);
    return integrate(f, std::span<const Panel>(parts));
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double tolerance) {
    if (a == b) return 0.0;
    double bad = std::numeric_limits<double>::quiet_NaN();
    auto guarded = [&](double x) {
        const double v = f(x);
        if (!std::isfinite(v) && std::isnan(bad)) bad = x;
        return std::isfinite(v) ? v : 0.0;
    };
    // Mapped to [-1, 1]: the library's error estimate is unreliable on very short intervals.
    const bool finite = std::isfinite(a) && std::isfinite(b);
    const double mid = finite ? 0.5 * (a + b) : 0.0;
    const double hw = finite ? 0.5 * (b - a) : 1.0;
    auto mapped = [&](double t) { return finite ? guarded(mid + hw * t) : guarded(t); };
    double error = 0.0;
    double l1 = 0.0;
    double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        mapped, finite ? -1.0 : a, finite ? 1.0 : b, 20, tolerance, &error, &l1);
    value *= hw;
    error *= std::abs(hw);
    l1 *= std::abs(hw);
    if (!std::isnan(bad)) throw QuadratureError("integrand is not finite", bad);
    if (l1 < 1e-250) return value;  // integrand underflows on the whole interval
    if (!std::isfinite(value) || error > std::max(tolerance * l1, 1e3 * tolerance * std::abs(value)) * 1e3)
        throw QuadratureError("adaptive quadrature did not converge on [a, b] starting at a", a);
    return value;
}

}  // namespace stmca::quad

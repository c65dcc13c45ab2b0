#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stmca/error.hpp"

namespace stmca {

using RealFn = std::function<double(double)>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Interval {
    double lower = -kInf;
    double upper = kInf;
    bool lower_closed = false;
    bool upper_closed = false;

    Interval() = default;
    Interval(double lo, double hi, bool lo_closed = false, bool hi_closed = false);

    bool contains(double x) const;
    bool finite() const { return std::isfinite(lower) && std::isfinite(upper); }
    double length() const { return upper - lower; }
};

enum class ScaleKind { identity, piecewise_analytic, sde_derived, tabulated };

std::string to_string(ScaleKind kind);

namespace detail {
struct ScaleImpl;
}

// Strictly increasing continuous scale function. Copies share one immutable
// implementation, so a ScaleFunction is cheap to pass around and safe to read
// from several threads.
class ScaleFunction {
public:
    static ScaleFunction identity();
    // Closed-form scale given by its values and the logarithm of its
    // right-derivative.
    static ScaleFunction analytic(RealFn value, RealFn log_derivative);
    // Monotone cubic (PCHIP) interpolation through (x_i, s_i); x and s must be
    // strictly increasing.
    static ScaleFunction tabulated(std::vector<double> x, std::vector<double> s);
    // Scale defined by its log-derivative L(x) = log s'(x) through the slope
    // dL/dx = slope(x), with L(anchor) = 0 and s(anchor) = 0. Knots of the
    // cache are the `knots` vector (sorted, containing anchor).
    static ScaleFunction from_log_slope(RealFn slope, double anchor, std::vector<double> knots);

    ScaleKind kind() const;
    double operator()(double x) const;
    double derivative(double x) const;
    double log_derivative(double x) const;

    // True when values are cheap and accurate enough to take differences of
    // directly. False for SDE-derived scales, whose increments are obtained by
    // integrating exp(log_derivative) in a local chart.
    bool closed_values() const;

private:
    explicit ScaleFunction(std::shared_ptr<const detail::ScaleImpl> impl);
    std::shared_ptr<const detail::ScaleImpl> impl_;
};

struct Atom {
    double location;
    double mass;
};

class SpeedMeasure {
public:
    SpeedMeasure();
    // `log_density` is optional; when absent it is log(density).
    SpeedMeasure(RealFn density, std::vector<Atom> atoms = {}, RealFn log_density = {});

    double density(double x) const { return density_(x); }
    double log_density(double x) const;
    const std::vector<Atom>& atoms() const { return atoms_; }
    // Mass of the atom located exactly at x, zero if none.
    double atom_mass_at(double x) const;
    // Density integral over `where` plus the atoms it contains. The integral
    // is split at `breaks`, where the density may jump.
    double mass_of(const Interval& where, const std::vector<double>& breaks = {}) const;

private:
    RealFn density_;
    RealFn log_density_;
    std::vector<Atom> atoms_;
};

enum class BoundaryKind { unreachable, absorbing, reflecting };

struct BoundaryBehavior {
    BoundaryKind kind = BoundaryKind::unreachable;
};

std::string to_string(BoundaryKind kind);

enum class BoundaryClass { exit, regular, natural, entrance };

std::string to_string(BoundaryClass kind);

struct SdeCoefficients {
    RealFn drift;
    RealFn diffusivity;
};

struct DiffusionSpec {
    Interval domain;
    ScaleFunction scale = ScaleFunction::identity();
    SpeedMeasure speed;
    BoundaryBehavior left_boundary;
    BoundaryBehavior right_boundary;

    // Points where s' or the density jumps; quadrature panels never straddle them.
    std::vector<double> breakpoints;
    // Points where the density may be singular; panels are graded toward them.
    std::vector<double> singular_points;

    std::string catalog_id;  // empty for user-built specs
    std::map<std::string, double> params;
    std::optional<SdeCoefficients> sde;

    // Checks the structural invariants; throws ParameterError.
    void validate() const;
};

struct SdeOptions {
    // Region tabulated eagerly; defaults to the domain clipped to
    // anchor +/- 25 where it is unbounded.
    std::optional<Interval> window;
    int panels = 512;
};

DiffusionSpec from_sde(RealFn drift, RealFn diffusivity, const Interval& domain, double anchor,
                       const SdeOptions& options = {});

struct NaturalScale {
    DiffusionSpec spec;
    RealFn forward;
    RealFn inverse;
};

NaturalScale to_natural_scale(const DiffusionSpec& spec);

// Feller integrals near `endpoint`, integrated over (endpoint + eps, probe_c).
struct FellerIntegrals {
    double first;   // integral of (s(x) - s(endpoint)) m(dx)
    double second;  // integral of (s(c) - s(y)) m(dy)
    bool first_infinite;
    bool second_infinite;
};

FellerIntegrals feller_integrals(const DiffusionSpec& spec, double endpoint, double probe_c);
BoundaryClass classify_boundary(const DiffusionSpec& spec, double endpoint, double probe_c);

bool check_nonexplosion(const DiffusionSpec& spec, double k1, const std::vector<double>& sample_points);

// (s(b) - s(a)) * m(dx) and related products are unchanged when s is
// rescaled by c and m by 1/c. A LocalChart picks c = exp(-L(center)) so that
// both factors stay representable even when s' spans hundreds of decades.
struct LocalChart {
    double log_shift = 0.0;  // L(center) for SDE-derived scales, 0 otherwise
    bool closed = true;
};

LocalChart make_chart(const DiffusionSpec& spec, double center);

// Density of the rescaled speed measure at x, and the rescaled atom mass.
double chart_density(const DiffusionSpec& spec, const LocalChart& chart, double x);
double chart_atom_mass(const LocalChart& chart, double mass);
// Rescaled scale derivative exp(L(x) - log_shift).
double chart_scale_derivative(const DiffusionSpec& spec, const LocalChart& chart, double x);

// (s(b) - s(a)) * m((a, b)) with the open interval, computed in a chart.
double scale_speed_product(const DiffusionSpec& spec, double a, double b, int panels = 16);

}  // namespace stmca

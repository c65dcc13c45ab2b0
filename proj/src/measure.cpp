#include "stmca/measure.hpp"

#include <cmath>
// The bundled pchip header calls isnan unqualified.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "stmca/mesh.hpp"
#include "stmca/quadrature.hpp"

namespace stmca {

namespace detail {

struct ScaleImpl {
    virtual ~ScaleImpl() = default;
    virtual ScaleKind kind() const = 0;
    virtual double value(double x) const = 0;
    virtual double log_derivative(double x) const = 0;
    virtual double derivative(double x) const { return std::exp(log_derivative(x)); }
};

namespace {

struct IdentityScale final : ScaleImpl {
    ScaleKind kind() const override { return ScaleKind::identity; }
    double value(double x) const override { return x; }
    double log_derivative(double) const override { return 0.0; }
    double derivative(double) const override { return 1.0; }
};

struct AnalyticScale final : ScaleImpl {
    RealFn value_fn;
    RealFn log_derivative_fn;
    ScaleKind kind() const override { return ScaleKind::piecewise_analytic; }
    double value(double x) const override { return value_fn(x); }
    double log_derivative(double x) const override { return log_derivative_fn(x); }
};

struct TabulatedScale final : ScaleImpl {
    using Spline = boost::math::interpolators::pchip<std::vector<double>>;
    std::shared_ptr<Spline> spline;
    double lo, hi;
    ScaleKind kind() const override { return ScaleKind::tabulated; }
    double value(double x) const override {
        if (x < lo || x > hi) throw DomainError("tabulated scale evaluated outside its table");
        return (*spline)(x);
    }
    double derivative(double x) const override {
        if (x < lo || x > hi) throw DomainError("tabulated scale evaluated outside its table");
        return spline->prime(x);
    }
    double log_derivative(double x) const override { return std::log(derivative(x)); }
};

// L(x) = log s'(x) cached at knots; between knots the slope is integrated by
// one Gauss-Legendre panel, so values are accurate to the rule's order.
struct SlopeScale final : ScaleImpl {
    RealFn slope;
    std::vector<double> knots;
    std::vector<double> log_d;  // L at knots
    std::vector<double> cum;    // s at knots

    ScaleKind kind() const override { return ScaleKind::sde_derived; }

    // Values of L at the Gauss nodes of [k, x] given L(k).
    quad::NodeVector node_logs(double k, double lk, double x) const {
        const auto& rule = quad::gauss_legendre();
        const double hw = 0.5 * (x - k);
        const double mid = 0.5 * (x + k);
        quad::NodeVector slopes;
        for (int i = 0; i < quad::kOrder; ++i) slopes(i) = slope(mid + hw * rule.nodes(i));
        return quad::NodeVector::Constant(lk) + hw * rule.cumulative * slopes;
    }

    double slope_integral(double from, double to) const {
        const auto& rule = quad::gauss_legendre();
        const double hw = 0.5 * (to - from);
        const double mid = 0.5 * (to + from);
        double acc = 0.0;
        for (int i = 0; i < quad::kOrder; ++i) acc += rule.weights(i) * slope(mid + hw * rule.nodes(i));
        return hw * acc;
    }

    std::size_t nearest_knot(double x) const {
        auto it = std::lower_bound(knots.begin(), knots.end(), x);
        if (it == knots.end()) return knots.size() - 1;
        const std::size_t j = static_cast<std::size_t>(it - knots.begin());
        if (j == 0) return 0;
        return (x - knots[j - 1] <= knots[j] - x) ? j - 1 : j;
    }

    double log_derivative(double x) const override {
        if (x >= knots.front() && x <= knots.back()) {
            const std::size_t j = nearest_knot(x);
            if (x == knots[j]) return log_d[j];
            return log_d[j] + slope_integral(knots[j], x);
        }
        const std::size_t j = x < knots.front() ? 0 : knots.size() - 1;
        return log_d[j] + quad::integrate_adaptive(slope, knots[j], x, 1e-13);
    }

    double value(double x) const override {
        if (x >= knots.front() && x <= knots.back()) {
            auto it = std::upper_bound(knots.begin(), knots.end(), x);
            std::size_t j = static_cast<std::size_t>(it - knots.begin());
            j = j == 0 ? 0 : j - 1;
            if (x == knots[j]) return cum[j];
            const auto logs = node_logs(knots[j], log_d[j], x);
            const auto& rule = quad::gauss_legendre();
            double acc = 0.0;
            for (int i = 0; i < quad::kOrder; ++i) acc += rule.weights(i) * std::exp(logs(i));
            return cum[j] + 0.5 * (x - knots[j]) * acc;
        }
        const std::size_t j = x < knots.front() ? 0 : knots.size() - 1;
        auto integrand = [this](double z) { return std::exp(log_derivative(z)); };
        return cum[j] + quad::integrate_adaptive(integrand, knots[j], x, 1e-12);
    }
};

}  // namespace
}  // namespace detail

Interval::Interval(double lo, double hi, bool lo_closed, bool hi_closed)
    : lower(lo), upper(hi), lower_closed(lo_closed), upper_closed(hi_closed) {
    if (!(lo < hi)) throw ParameterError("interval requires lower < upper");
    if ((lo_closed && !std::isfinite(lo)) || (hi_closed && !std::isfinite(hi)))
        throw ParameterError("a closed interval endpoint must be finite");
}

bool Interval::contains(double x) const {
    if (x > lower && x < upper) return true;
    return (x == lower && lower_closed) || (x == upper && upper_closed);
}

std::string to_string(ScaleKind kind) {
    switch (kind) {
        case ScaleKind::identity: return "identity";
        case ScaleKind::piecewise_analytic: return "piecewise_analytic";
        case ScaleKind::sde_derived: return "sde_derived";
        case ScaleKind::tabulated: return "tabulated";
    }
    return "unknown";
}

std::string to_string(BoundaryKind kind) {
    switch (kind) {
        case BoundaryKind::unreachable: return "unreachable";
        case BoundaryKind::absorbing: return "absorbing";
        case BoundaryKind::reflecting: return "reflecting";
    }
    return "unknown";
}

std::string to_string(BoundaryClass kind) {
    switch (kind) {
        case BoundaryClass::exit: return "exit";
        case BoundaryClass::regular: return "regular";
        case BoundaryClass::natural: return "natural";
        case BoundaryClass::entrance: return "entrance";
    }
    return "unknown";
}

ScaleFunction::ScaleFunction(std::shared_ptr<const detail::ScaleImpl> impl) : impl_(std::move(impl)) {}

ScaleFunction ScaleFunction::identity() {
    static const auto shared = std::make_shared<const detail::IdentityScale>();
    return ScaleFunction(shared);
}

ScaleFunction ScaleFunction::analytic(RealFn value, RealFn log_derivative) {
    auto impl = std::make_shared<detail::AnalyticScale>();
    impl->value_fn = std::move(value);
    impl->log_derivative_fn = std::move(log_derivative);
    return ScaleFunction(impl);
}

ScaleFunction ScaleFunction::tabulated(std::vector<double> x, std::vector<double> s) {
    if (x.size() != s.size() || x.size() < 4)
        throw ParameterError("tabulated scale needs at least four (x, s) pairs of equal length");
    for (std::size_t i = 1; i < x.size(); ++i) {
        if (!(x[i] > x[i - 1]) || !(s[i] > s[i - 1]))
            throw ParameterError("tabulated scale must be strictly increasing");
    }
    auto impl = std::make_shared<detail::TabulatedScale>();
    impl->lo = x.front();
    impl->hi = x.back();
    impl->spline = std::make_shared<detail::TabulatedScale::Spline>(std::move(x), std::move(s));
    return ScaleFunction(impl);
}

ScaleFunction ScaleFunction::from_log_slope(RealFn slope, double anchor, std::vector<double> knots) {
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    auto at = std::find(knots.begin(), knots.end(), anchor);
    if (at == knots.end()) throw ParameterError("scale anchor must be one of the tabulation knots");
    const std::size_t ia = static_cast<std::size_t>(at - knots.begin());
    auto impl = std::make_shared<detail::SlopeScale>();
    impl->slope = std::move(slope);
    impl->knots = std::move(knots);
    const std::size_t n = impl->knots.size();
    impl->log_d.assign(n, 0.0);
    impl->cum.assign(n, 0.0);
    const auto& rule = quad::gauss_legendre();
    auto panel_exp_integral = [&](std::size_t j, std::size_t k) {
        // integral of exp(L) over [knots[j], knots[k]] (|j-k| = 1), L(knots[j]) known
        const auto logs = impl->node_logs(impl->knots[j], impl->log_d[j], impl->knots[k]);
        double acc = 0.0;
        for (int i = 0; i < quad::kOrder; ++i) acc += rule.weights(i) * std::exp(logs(i));
        return 0.5 * (impl->knots[k] - impl->knots[j]) * acc;
    };
    for (std::size_t j = ia + 1; j < n; ++j) {
        impl->log_d[j] = impl->log_d[j - 1] + impl->slope_integral(impl->knots[j - 1], impl->knots[j]);
        impl->cum[j] = impl->cum[j - 1] + panel_exp_integral(j - 1, j);
    }
    for (std::size_t j = ia; j-- > 0;) {
        impl->log_d[j] = impl->log_d[j + 1] + impl->slope_integral(impl->knots[j + 1], impl->knots[j]);
        impl->cum[j] = impl->cum[j + 1] + panel_exp_integral(j + 1, j);
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (!std::isfinite(impl->log_d[j]))
            throw QuadratureError("log scale derivative is not finite", impl->knots[j]);
    }
    return ScaleFunction(impl);
}

ScaleKind ScaleFunction::kind() const { return impl_->kind(); }
double ScaleFunction::operator()(double x) const { return impl_->value(x); }
double ScaleFunction::derivative(double x) const { return impl_->derivative(x); }
double ScaleFunction::log_derivative(double x) const { return impl_->log_derivative(x); }
bool ScaleFunction::closed_values() const { return impl_->kind() != ScaleKind::sde_derived; }

SpeedMeasure::SpeedMeasure() : SpeedMeasure([](double) { return 2.0; }) {}

SpeedMeasure::SpeedMeasure(RealFn density, std::vector<Atom> atoms, RealFn log_density)
    : density_(std::move(density)), log_density_(std::move(log_density)), atoms_(std::move(atoms)) {
    std::sort(atoms_.begin(), atoms_.end(), [](const Atom& l, const Atom& r) { return l.location < r.location; });
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        if (!(atoms_[i].mass > 0.0) || !std::isfinite(atoms_[i].mass))
            throw ParameterError("atom masses must be positive and finite");
        if (i > 0 && atoms_[i].location == atoms_[i - 1].location)
            throw ParameterError("atom locations must be distinct");
    }
}

double SpeedMeasure::log_density(double x) const {
    return log_density_ ? log_density_(x) : std::log(density_(x));
}

double SpeedMeasure::atom_mass_at(double x) const {
    for (const Atom& atom : atoms_) {
        if (atom.location == x) return atom.mass;
    }
    return 0.0;
}

double SpeedMeasure::mass_of(const Interval& where, const std::vector<double>& breaks) const {
    std::vector<double> cuts{where.lower};
    for (double b : breaks) {
        if (b > where.lower && b < where.upper) cuts.push_back(b);
    }
    cuts.push_back(where.upper);
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        total += quad::integrate_adaptive(density_, cuts[i], cuts[i + 1], 1e-12);
    for (const Atom& atom : atoms_) {
        if (where.contains(atom.location)) total += atom.mass;
    }
    return total;
}

void DiffusionSpec::validate() const {
    for (const Atom& atom : speed.atoms()) {
        if (!domain.contains(atom.location)) throw ParameterError("speed-measure atom lies outside the domain");
    }
    auto check = [](const BoundaryBehavior& behavior, double endpoint, bool closed, const char* side) {
        if (behavior.kind == BoundaryKind::unreachable) return;
        if (!std::isfinite(endpoint) || !closed)
            throw ParameterError(std::string(side) + " boundary behavior requires a finite closed endpoint");
    };
    check(left_boundary, domain.lower, domain.lower_closed, "left");
    check(right_boundary, domain.upper, domain.upper_closed, "right");
}

DiffusionSpec from_sde(RealFn drift, RealFn diffusivity, const Interval& domain, double anchor,
                       const SdeOptions& options) {
    if (!(anchor > domain.lower && anchor < domain.upper))
        throw ParameterError("scale anchor must lie in the open domain");
    Interval window = options.window.value_or(Interval(std::max(domain.lower, anchor - 25.0),
                                                       std::min(domain.upper, anchor + 25.0)));
    window.lower = std::max(window.lower, domain.lower);
    window.upper = std::min(window.upper, domain.upper);

    auto slope = [drift, diffusivity](double x) {
        const double sigma = diffusivity(x);
        return -2.0 * drift(x) / (sigma * sigma);
    };

    std::vector<double> graded;
    if (window.lower == domain.lower) graded.push_back(window.lower);
    if (window.upper == domain.upper) graded.push_back(window.upper);
    std::vector<double> breaks{window.lower, anchor, window.upper};
    quad::PartitionOptions popt;
    popt.panels = options.panels;
    const auto panels = quad::partition(breaks, graded, popt);
    std::vector<double> knots;
    knots.reserve(panels.size() + 1);
    for (const auto& p : panels) knots.push_back(p.lo);
    knots.push_back(panels.back().hi);
    // Endpoints of an open domain cannot be evaluated.
    auto keep = [&](double k) {
        if (k == domain.lower && !domain.lower_closed) return false;
        if (k == domain.upper && !domain.upper_closed) return false;
        return true;
    };
    knots.erase(std::remove_if(knots.begin(), knots.end(), [&](double k) { return !keep(k); }), knots.end());
    for (double k : knots) {
        if (k > domain.lower && k < domain.upper) {
            const double sigma = diffusivity(k);
            if (!(sigma > 0.0) || !std::isfinite(sigma)) {
                std::ostringstream os;
                os.precision(17);
                os << "diffusivity must be positive in the interior (x = " << k << ")";
                throw ParameterError(os.str());
            }
        }
    }

    DiffusionSpec spec;
    spec.domain = domain;
    spec.scale = ScaleFunction::from_log_slope(slope, anchor, std::move(knots));
    const ScaleFunction scale = spec.scale;
    auto log_density = [scale, diffusivity](double x) {
        const double sigma = diffusivity(x);
        return std::log(2.0) - scale.log_derivative(x) - 2.0 * std::log(sigma);
    };
    auto density = [log_density](double x) { return std::exp(log_density(x)); };
    spec.speed = SpeedMeasure(density, {}, log_density);
    if (std::isfinite(domain.lower)) spec.singular_points.push_back(domain.lower);
    if (std::isfinite(domain.upper)) spec.singular_points.push_back(domain.upper);
    spec.sde = SdeCoefficients{std::move(drift), std::move(diffusivity)};
    return spec;
}

namespace {

double safe_scale(const ScaleFunction& s, double x, double fallback) {
    try {
        const double v = s(x);
        return std::isnan(v) ? fallback : v;
    } catch (const Error&) {
        return fallback;
    }
}

// Some finite point of the domain to seed bracketing searches.
double interior_seed(const Interval& d) {
    if (d.contains(0.0) && d.lower < 0.0 && d.upper > 0.0) return 0.0;
    if (d.finite()) return 0.5 * (d.lower + d.upper);
    if (std::isfinite(d.lower)) return d.lower + 1.0;
    return d.upper - 1.0;
}

}  // namespace

NaturalScale to_natural_scale(const DiffusionSpec& spec) {
    if (spec.scale.kind() == ScaleKind::identity) {
        auto id = [](double x) { return x; };
        return {spec, id, id};
    }
    const ScaleFunction s = spec.scale;
    const Interval dom = spec.domain;
    const double y_lo = std::isfinite(dom.lower) ? safe_scale(s, dom.lower, -kInf) : -kInf;
    const double y_hi = std::isfinite(dom.upper) ? safe_scale(s, dom.upper, kInf) : kInf;
    const double seed = interior_seed(dom);

    auto inverse = [s, dom, y_lo, y_hi, seed](double y) {
        if (!(y >= y_lo && y <= y_hi)) throw DomainError("inverse scale evaluated outside s(domain)");
        if (y == y_lo) return dom.lower;
        if (y == y_hi) return dom.upper;
        auto f = [&](double x) { return s(x) - y; };
        double lo = seed, hi = seed;
        double step = 1.0;
        // Expand toward the target until the sign changes, staying inside the domain.
        if (f(seed) > 0.0) {
            hi = seed;
            for (int i = 0; i < 2000; ++i) {
                lo = std::isfinite(dom.lower) ? std::max(hi - step, 0.5 * (hi + dom.lower)) : hi - step;
                if (f(lo) <= 0.0) break;
                hi = lo;
                step *= 2.0;
            }
        } else {
            lo = seed;
            for (int i = 0; i < 2000; ++i) {
                hi = std::isfinite(dom.upper) ? std::min(lo + step, 0.5 * (lo + dom.upper)) : lo + step;
                if (f(hi) >= 0.0) break;
                lo = hi;
                step *= 2.0;
            }
        }
        const double flo = f(lo), fhi = f(hi);
        if (flo == 0.0) return lo;
        if (fhi == 0.0) return hi;
        if (!(flo < 0.0 && fhi > 0.0)) throw DomainError("could not bracket the inverse scale");
        std::uintmax_t iters = 200;
        auto tol = boost::math::tools::eps_tolerance<double>(52);
        auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
        return 0.5 * (r.first + r.second);
    };

    DiffusionSpec out;
    out.domain = Interval(y_lo, y_hi, dom.lower_closed, dom.upper_closed);
    out.scale = ScaleFunction::identity();
    const SpeedMeasure speed = spec.speed;
    auto log_density = [speed, s, inverse](double y) {
        const double x = inverse(y);
        return speed.log_density(x) - s.log_derivative(x);
    };
    auto density = [log_density](double y) { return std::exp(log_density(y)); };
    std::vector<Atom> atoms;
    for (const Atom& a : spec.speed.atoms()) atoms.push_back({s(a.location), a.mass});
    out.speed = SpeedMeasure(density, atoms, log_density);
    out.left_boundary = spec.left_boundary;
    out.right_boundary = spec.right_boundary;
    for (double p : spec.breakpoints) out.breakpoints.push_back(s(p));
    for (double p : spec.singular_points) out.singular_points.push_back(safe_scale(s, p, kInf));
    out.singular_points.erase(std::remove_if(out.singular_points.begin(), out.singular_points.end(),
                                             [](double v) { return !std::isfinite(v); }),
                              out.singular_points.end());
    return {out, [s](double x) { return s(x); }, inverse};
}

LocalChart make_chart(const DiffusionSpec& spec, double center) {
    LocalChart chart;
    chart.closed = spec.scale.closed_values();
    if (!chart.closed) chart.log_shift = spec.scale.log_derivative(center);
    return chart;
}

double chart_density(const DiffusionSpec& spec, const LocalChart& chart, double x) {
    if (chart.closed) return spec.speed.density(x);
    return std::exp(spec.speed.log_density(x) + chart.log_shift);
}

double chart_atom_mass(const LocalChart& chart, double mass) {
    return chart.closed ? mass : std::exp(std::log(mass) + chart.log_shift);
}

double chart_scale_derivative(const DiffusionSpec& spec, const LocalChart& chart, double x) {
    if (chart.closed) return spec.scale.derivative(x);
    return std::exp(spec.scale.log_derivative(x) - chart.log_shift);
}

double scale_speed_product(const DiffusionSpec& spec, double a, double b, int panels) {
    CellMesh::Options opt;
    opt.panels = panels;
    const CellMesh mesh(spec, a, b, opt);
    return mesh.total_u() * mesh.total_mass();
}

namespace {

constexpr double kInfiniteThreshold = 1e12;
constexpr double kStabilityTolerance = 1e-3;

struct FellerSample {
    double first;
    double second;
};

FellerSample feller_at(const DiffusionSpec& spec, double endpoint, double c, double eps) {
    const bool lower = endpoint < c;
    const double lo = lower ? endpoint + eps : c;
    const double hi = lower ? c : endpoint - eps;
    CellMesh::Options opt;
    opt.panels = 64;
    const double width = hi - lo;
    opt.graded_levels = std::clamp(static_cast<int>(std::ceil(std::log2(width / eps))) + 8, 20, 120);
    opt.graded.push_back(lower ? lo : hi);
    opt.chart_center = c;
    const CellMesh mesh(spec, lo, hi, opt);
    double near_sum = 0.0;  // integral of (distance in scale from endpoint side) dm
    double far_sum = 0.0;
    const auto& u = mesh.u();
    const auto& w = mesh.w();
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
        const double dm = mesh.density()[i] * mesh.weights()[i];
        near_sum += u[i] * dm;
        far_sum += w[i] * dm;
    }
    for (const auto& atom : mesh.atoms()) {
        near_sum += atom.u * atom.mass;
        far_sum += atom.w * atom.mass;
    }
    // For the lower endpoint u measures distance from the endpoint side.
    if (lower) return {near_sum, far_sum};
    return {far_sum, near_sum};
}

}  // namespace

FellerIntegrals feller_integrals(const DiffusionSpec& spec, double endpoint, double probe_c) {
    if (!std::isfinite(endpoint)) throw ContractError("boundary classification needs a finite endpoint");
    if (!(probe_c > spec.domain.lower && probe_c < spec.domain.upper) || probe_c == endpoint)
        throw ContractError("probe point must lie strictly inside the domain");
    const double gap = std::abs(probe_c - endpoint);
    double eps = std::min(1e-2, 0.5 * gap);
    FellerSample previous{};
    FellerSample current{};
    bool first_round = true;
    try {
        while (true) {
            current = feller_at(spec, endpoint, probe_c, eps);
            if (eps <= 1e-10) break;
            previous = current;
            first_round = false;
            eps *= 0.5;
        }
    } catch (const QuadratureError& e) {
        throw ClassificationError(std::string("Feller integral did not converge: ") + e.what());
    }
    auto infinite = [&](double now, double before) {
        if (!std::isfinite(now) || now > kInfiniteThreshold) return true;
        if (first_round) return false;
        const double change = std::abs(now - before) / std::max(std::abs(now), 1e-300);
        return change > kStabilityTolerance;
    };
    FellerIntegrals out;
    out.first = current.first;
    out.second = current.second;
    out.first_infinite = infinite(current.first, previous.first);
    out.second_infinite = infinite(current.second, previous.second);
    if (std::isnan(out.first) || std::isnan(out.second))
        throw ClassificationError("Feller integral evaluated to NaN");
    return out;
}

BoundaryClass classify_boundary(const DiffusionSpec& spec, double endpoint, double probe_c) {
    const FellerIntegrals f = feller_integrals(spec, endpoint, probe_c);
    if (!f.first_infinite && f.second_infinite) return BoundaryClass::exit;
    if (!f.first_infinite && !f.second_infinite) return BoundaryClass::regular;
    if (f.first_infinite && f.second_infinite) return BoundaryClass::natural;
    return BoundaryClass::entrance;
}

bool check_nonexplosion(const DiffusionSpec& spec, double k1, const std::vector<double>& sample_points) {
    for (double x : sample_points) {
        const double s = spec.scale(x);
        const double bound = k1 * spec.scale.derivative(x) / (1.0 + s * s);
        if (!(spec.speed.density(x) >= bound)) return false;
    }
    return true;
}

}  // namespace stmca

#include "stmca/analysis.hpp"

#include <Eigen/Dense>
#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include "stmca/catalog.hpp"
#include "stmca/quadrature.hpp"
#include "stmca/special.hpp"

namespace stmca {

EmpiricalLaw::EmpiricalLaw(std::vector<double> samples, double horizon, LawMeta meta)
    : sorted_(std::move(samples)), horizon_(horizon), meta_(std::move(meta)) {
    if (sorted_.empty()) throw ParameterError("empirical law needs at least one sample");
    for (double x : sorted_) {
        if (!std::isfinite(x)) throw ParameterError("empirical law samples must be finite");
    }
    std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalLaw::mean() const {
    double s = 0.0;
    for (double x : sorted_) s += x;
    return s / static_cast<double>(sorted_.size());
}

double EmpiricalLaw::variance() const {
    if (sorted_.size() < 2) return 0.0;
    const double m = mean();
    double s = 0.0;
    for (double x : sorted_) s += (x - m) * (x - m);
    return s / static_cast<double>(sorted_.size() - 1);
}

double EmpiricalLaw::quantile(double s) const {
    const std::size_t n = sorted_.size();
    const double pos = s * static_cast<double>(n) - 0.5;
    if (pos <= 0.0) return sorted_.front();
    if (pos >= static_cast<double>(n - 1)) return sorted_.back();
    const auto i = static_cast<std::size_t>(pos);
    const double f = pos - static_cast<double>(i);
    return sorted_[i] + f * (sorted_[i + 1] - sorted_[i]);
}

namespace {

void check_p(double p) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw ParameterError("Wasserstein order p must be at least 1");
}

// Integral over a segment of length len of |d(s)|^p, d linear from d0 to d1.
double abs_pow_linear(double d0, double d1, double len, double p) {
    if (len <= 0.0) return 0.0;
    if (d0 * d1 < 0.0) {
        const double z = d0 / (d0 - d1);
        return abs_pow_linear(d0, 0.0, z * len, p) + abs_pow_linear(0.0, d1, (1.0 - z) * len, p);
    }
    const double a = std::abs(d0);
    const double b = std::abs(d1);
    if (std::abs(b - a) <= 1e-9 * std::max(a, b)) return len * std::pow(0.5 * (a + b), p);
    return len * (std::pow(b, p + 1.0) - std::pow(a, p + 1.0)) / ((p + 1.0) * (b - a));
}

}  // namespace

double wasserstein_1d(const EmpiricalLaw& u, const EmpiricalLaw& v, double p) {
    check_p(p);
    const auto& x = u.sorted();
    const auto& y = v.sorted();
    if (x.size() == y.size()) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += std::pow(std::abs(x[i] - y[i]), p);
        return std::pow(s / static_cast<double>(x.size()), 1.0 / p);
    }
    std::vector<double> knots{0.0, 1.0};
    for (const auto* law : {&u, &v}) {
        const double n = static_cast<double>(law->size());
        for (std::size_t i = 0; i < law->size(); ++i) knots.push_back((static_cast<double>(i) + 0.5) / n);
    }
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        const double s0 = knots[k], s1 = knots[k + 1];
        total += abs_pow_linear(u.quantile(s0) - v.quantile(s0), u.quantile(s1) - v.quantile(s1), s1 - s0, p);
    }
    return std::pow(total, 1.0 / p);
}

ReferenceKernel::ReferenceKernel(Parts parts) : parts_(std::move(parts)) {
    std::sort(parts_.breaks.begin(), parts_.breaks.end());
}

double ReferenceKernel::cdf(double x) const {
    if (x < parts_.lo) return 0.0;
    return std::clamp(parts_.cdf(x), 0.0, 1.0);
}

double ReferenceKernel::quantile(double s) const {
    if (parts_.atom) {
        const double z = parts_.atom->location;
        const double top = cdf(z);
        if (s >= top - parts_.atom->mass && s <= top) return z;
    }
    if (s <= cdf(parts_.lo)) return parts_.lo;
    if (s >= cdf(parts_.hi)) return parts_.hi;
    auto f = [&](double y) { return cdf(y) - s; };
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(f, parts_.lo, parts_.hi, boost::math::tools::eps_tolerance<double>(50),
                                                     iters);
    return 0.5 * (r.first + r.second);
}

namespace {

std::vector<double> pieces(const ReferenceKernel& ref, double a, double b) {
    std::vector<double> pts{a, b};
    for (double x : ref.breaks()) {
        if (x > a && x < b) pts.push_back(x);
    }
    if (ref.atom() && ref.atom()->location > a && ref.atom()->location < b) pts.push_back(ref.atom()->location);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

double integrate_pieces(const ReferenceKernel& ref, const RealFn& f, double a, double b) {
    const auto pts = pieces(ref, a, b);
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) s += quad::integrate_adaptive(f, pts[i], pts[i + 1], 1e-11);
    return s;
}

}  // namespace

double ReferenceKernel::total_mass() const {
    const double m = integrate_pieces(*this, parts_.density, parts_.lo, parts_.hi);
    return m + (parts_.atom ? parts_.atom->mass : 0.0);
}

namespace {

using std::numbers::sqrt2;
using namespace special;

double param(const std::map<std::string, double>& given, const std::map<std::string, double>& defaults,
             const std::string& key) {
    if (auto it = given.find(key); it != given.end()) return it->second;
    return defaults.at(key);
}

ReferenceKernel gaussian(double mean, double var) {
    const double sd = std::sqrt(var);
    ReferenceKernel::Parts k;
    k.density = [=](double y) { return normal_pdf((y - mean) / sd) / sd; };
    k.cdf = [=](double y) { return normal_cdf((y - mean) / sd); };
    k.lo = mean - 9.0 * sd;
    k.hi = mean + 9.0 * sd;
    k.mean = mean;
    k.variance = var;
    return ReferenceKernel(std::move(k));
}

// Mirror image of a kernel: law of -X.
ReferenceKernel mirrored(const ReferenceKernel& ref) {
    ReferenceKernel::Parts k;
    k.density = [ref](double y) { return ref.density(-y); };
    k.cdf = [ref](double y) {
        double v = 1.0 - ref.cdf(-y);
        if (ref.atom() && ref.atom()->location == -y) v += ref.atom()->mass;
        return v;
    };
    if (ref.atom()) k.atom = Atom{-ref.atom()->location, ref.atom()->mass};
    k.lo = -ref.hi();
    k.hi = -ref.lo();
    for (double b : ref.breaks()) k.breaks.push_back(-b);
    k.mean = -ref.mean();
    k.variance = ref.variance();
    return ReferenceKernel(std::move(k));
}

// Sticky Brownian motion started at 0, speed 2 dx + rho delta_0.
struct StickyFromZero {
    double rho;
    double c() const { return 2.0 * sqrt2 / rho; }
    double atom(double t) const { return erfcx(c() * std::sqrt(t)); }
    double density(double t, double y) const {
        if (t <= 0.0) return 0.0;
        const double a = sqrt2 * std::abs(y);
        const double z = a / (2.0 * std::sqrt(t)) + c() * std::sqrt(t);
        return 2.0 / rho * erfcx(z) * std::exp(-a * a / (4.0 * t));
    }
    // Mass of {X > A} (equivalently {X < -A}) for A >= 0.
    double tail(double t, double A) const {
        if (t <= 0.0) return 0.0;
        const double w = A / std::sqrt(2.0 * t);
        return 0.5 * (std::erfc(w) - erfcx(w + c() * std::sqrt(t)) * std::exp(-w * w));
    }
    double cdf(double t, double y) const { return y < 0.0 ? tail(t, -y) : 1.0 - tail(t, y); }
};

// Integral over [0, t] on pieces that shrink geometrically toward both ends.
double graded_to_end(const RealFn& f, double t) {
    double total = quad::integrate(f, 0.0, std::ldexp(t, -48), 2) + quad::integrate(f, t - std::ldexp(t, -48), t, 2);
    for (int k = 1; k < 48; ++k) {
        const double w0 = std::ldexp(t, -k - 1), w1 = std::ldexp(t, -k);
        total += quad::integrate(f, w0, w1, 4) + quad::integrate(f, t - w1, t - w0, 4);
    }
    return total;
}

ReferenceKernel sticky_kernel(double rho, double x0, double t) {
    if (!(rho > 0.0)) throw ParameterError("stickiness rho must be positive");
    const StickyFromZero z{rho};
    if (x0 < 0.0) return mirrored(sticky_kernel(rho, -x0, t));
    ReferenceKernel::Parts k;
    const double st = std::sqrt(t);
    k.lo = std::min(0.0, x0) - 9.0 * st;
    k.hi = std::max(0.0, x0) + 9.0 * st;
    k.breaks = {0.0};
    k.mean = x0;
    if (x0 == 0.0) {
        k.density = [z, t](double y) { return y == 0.0 ? 0.0 : z.density(t, y); };
        k.cdf = [z, t](double y) { return z.cdf(t, y); };
        k.atom = Atom{0.0, z.atom(t)};
        k.variance = std::numeric_limits<double>::quiet_NaN();
        return ReferenceKernel(std::move(k));
    }
    // First passage to 0 at time s has density x0 / sqrt(2 pi s^3) exp(-x0^2 / 2s).
    auto hit = [x0](double s) {
        if (s <= 0.0) return 0.0;
        return x0 / std::sqrt(2.0 * std::numbers::pi * s * s * s) * std::exp(-x0 * x0 / (2.0 * s));
    };
    auto killed_density = [x0, st](double y) {
        if (y <= 0.0) return 0.0;
        return (normal_pdf((y - x0) / st) - normal_pdf((y + x0) / st)) / st;
    };
    auto killed_cdf = [x0, st](double y) {
        if (y <= 0.0) return 0.0;
        return (normal_cdf((y - x0) / st) - normal_cdf(-x0 / st)) - (normal_cdf((y + x0) / st) - normal_cdf(x0 / st));
    };
    k.density = [=](double y) {
        if (y == 0.0) return 0.0;
        return killed_density(y) + graded_to_end([&](double s) { return hit(s) * z.density(t - s, y); }, t);
    };
    k.cdf = [=](double y) {
        return killed_cdf(y) + graded_to_end([&](double s) { return hit(s) * z.cdf(t - s, y); }, t);
    };
    k.atom = Atom{0.0, graded_to_end([&](double s) { return hit(s) * z.atom(t - s); }, t)};
    k.variance = std::numeric_limits<double>::quiet_NaN();
    return ReferenceKernel(std::move(k));
}

ReferenceKernel skew_kernel(double beta, double x0, double t) {
    if (!(beta > 0.0 && beta < 1.0)) throw ParameterError("skew parameter beta must lie in (0, 1)");
    const double st = std::sqrt(t);
    const double ax = std::abs(x0);
    const double g = 2.0 * beta - 1.0;
    ReferenceKernel::Parts k;
    k.density = [=](double y) {
        const double sgn = y > 0.0 ? 1.0 : (y < 0.0 ? -1.0 : 0.0);
        return (normal_pdf((y - x0) / st) + sgn * g * normal_pdf((ax + std::abs(y)) / st)) / st;
    };
    k.cdf = [=](double y) {
        if (y < 0.0) return normal_cdf((y - x0) / st) - g * normal_cdf((y - ax) / st);
        const double at0 = normal_cdf(-x0 / st) - g * normal_cdf(-ax / st);
        return at0 + (normal_cdf((y - x0) / st) - normal_cdf(-x0 / st)) + g * (normal_sf(ax / st) - normal_sf((ax + y) / st));
    };
    k.lo = std::min(0.0, x0) - 9.0 * st;
    k.hi = std::max(0.0, x0) + 9.0 * st;
    k.breaks = {0.0};
    k.mean = 0.0;
    k.variance = std::numeric_limits<double>::quiet_NaN();
    ReferenceKernel ref(k);
    k.mean = quad::integrate_adaptive([&](double y) { return y * ref.density(y); }, k.lo, 0.0, 1e-12) +
             quad::integrate_adaptive([&](double y) { return y * ref.density(y); }, 0.0, k.hi, 1e-12);
    return ReferenceKernel(std::move(k));
}

ReferenceKernel reflected_kernel(double x0, double t) {
    if (x0 < 0.0) throw DomainError("reflected Brownian motion starts in [0, inf)");
    const double st = std::sqrt(t);
    ReferenceKernel::Parts k;
    k.density = [=](double y) {
        if (y < 0.0) return 0.0;
        return (normal_pdf((y - x0) / st) + normal_pdf((y + x0) / st)) / st;
    };
    k.cdf = [=](double y) {
        if (y < 0.0) return 0.0;
        return normal_cdf((y - x0) / st) - normal_cdf((-y - x0) / st);
    };
    k.lo = 0.0;
    k.hi = x0 + 9.0 * st;
    const double r = x0 / st;
    k.mean = st * 2.0 * normal_pdf(r) + x0 * (1.0 - 2.0 * normal_cdf(-r));
    k.variance = x0 * x0 + t - k.mean * k.mean;
    return ReferenceKernel(std::move(k));
}

ReferenceKernel cir_kernel(double theta, double mu, double sigma, double x0, double t) {
    if (!(theta > 0.0 && mu > 0.0 && sigma > 0.0)) throw ParameterError("CIR parameters must be positive");
    if (x0 < 0.0) throw DomainError("CIR starts in [0, inf)");
    const double e = std::exp(-theta * t);
    const double scale = sigma * sigma * (1.0 - e) / (4.0 * theta);
    const double dof = 4.0 * theta * mu / (sigma * sigma);
    const double nc = x0 * e / scale;
    const boost::math::non_central_chi_squared dist(dof, nc);
    ReferenceKernel::Parts k;
    k.density = [=](double y) { return y <= 0.0 ? 0.0 : boost::math::pdf(dist, y / scale) / scale; };
    k.cdf = [=](double y) { return y <= 0.0 ? 0.0 : boost::math::cdf(dist, y / scale); };
    k.lo = 0.0;
    k.hi = scale * boost::math::quantile(boost::math::complement(dist, 1e-15));
    k.mean = mu + (x0 - mu) * e;
    k.variance = x0 * sigma * sigma * e * (1.0 - e) / theta + mu * sigma * sigma * (1.0 - e) * (1.0 - e) / (2.0 * theta);
    return ReferenceKernel(std::move(k));
}

}  // namespace

ReferenceKernel reference_kernel(const std::string& spec_id, const std::map<std::string, double>& params, double x0,
                                 double t) {
    if (!(t > 0.0)) throw ParameterError("kernel time must be positive");
    static const std::vector<std::string> supported{"bm", "ou", "reflected_bm", "skew_bm", "sticky_bm", "cir"};
    if (std::find(supported.begin(), supported.end(), spec_id) == supported.end())
        throw UnsupportedError("no reference kernel for '" + spec_id + "'");
    const auto defaults = catalog::preset_parameters(spec_id);
    auto p = [&](const char* key) { return param(params, defaults, key); };
    if (spec_id == "bm") return gaussian(x0, t);
    if (spec_id == "ou") {
        const double th = p("theta"), mu = p("mu"), sg = p("sigma");
        if (!(th > 0.0 && sg > 0.0)) throw ParameterError("OU needs theta > 0 and sigma > 0");
        return gaussian(mu + (x0 - mu) * std::exp(-th * t), sg * sg * -std::expm1(-2.0 * th * t) / (2.0 * th));
    }
    if (spec_id == "reflected_bm") return reflected_kernel(x0, t);
    if (spec_id == "skew_bm") return skew_kernel(p("beta"), x0, t);
    if (spec_id == "sticky_bm") return sticky_kernel(p("rho"), x0, t);
    return cir_kernel(p("theta"), p("mu"), p("sigma"), x0, t);
}

double wasserstein_to_reference(const EmpiricalLaw& law, const ReferenceKernel& ref, double p) {
    check_p(p);
    const auto& xs = law.sorted();
    const double n = static_cast<double>(xs.size());
    double total = 0.0;
    double c_prev = 0.0;
    double q_prev = ref.lo();
    std::size_t i = 0;
    while (i < xs.size()) {
        const double x = xs[i];
        std::size_t j = i;
        while (j < xs.size() && xs[j] == x) ++j;
        const double c = static_cast<double>(j) / n;
        const double q = j == xs.size() ? ref.hi() : ref.quantile(c);
        auto cost = [&](double y) { return std::pow(std::abs(x - y), p) * ref.density(y); };
        if (q > q_prev) {
            if (x > q_prev && x < q) {
                total += integrate_pieces(ref, cost, q_prev, x) + integrate_pieces(ref, cost, x, q);
            } else {
                total += integrate_pieces(ref, cost, q_prev, q);
            }
        }
        if (ref.atom()) {
            const double z = ref.atom()->location;
            const double top = ref.cdf(z);
            const double overlap = std::min(c, top) - std::max(c_prev, top - ref.atom()->mass);
            if (overlap > 0.0) total += overlap * std::pow(std::abs(x - z), p);
        }
        c_prev = c;
        q_prev = q;
        i = j;
    }
    return std::pow(total, 1.0 / p);
}

RateFit rate_fit(std::vector<RatePoint> points) {
    if (points.size() < 3) throw ParameterError("a rate fit needs at least three points");
    for (const auto& pt : points) {
        if (!(pt.metric > 0.0) || !std::isfinite(pt.metric)) throw ParameterError("rate fit metrics must be positive");
        if (!(pt.error > 0.0) || !std::isfinite(pt.error)) throw ParameterError("rate fit errors must be positive");
    }
    std::sort(points.begin(), points.end(), [](const RatePoint& a, const RatePoint& b) { return a.metric > b.metric; });
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (!(points[i].metric < points[i - 1].metric)) throw ParameterError("rate fit metrics must be distinct");
    }
    const auto m = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd A(m, 2);
    Eigen::VectorXd y(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        A(i, 0) = std::log(points[static_cast<std::size_t>(i)].metric);
        A(i, 1) = 1.0;
        y(i) = std::log(points[static_cast<std::size_t>(i)].error);
    }
    const Eigen::Vector2d beta = A.colPivHouseholderQr().solve(y);
    const Eigen::VectorXd resid = y - A * beta;
    const double ss_tot = (y.array() - y.mean()).square().sum();
    RateFit fit;
    fit.points = std::move(points);
    fit.slope = beta(0);
    fit.intercept = beta(1);
    fit.r2 = ss_tot > 0.0 ? 1.0 - resid.squaredNorm() / ss_tot : 1.0;
    return fit;
}

nlohmann::json rate_fit_json(const RateFit& fit) {
    nlohmann::json j;
    j["points"] = nlohmann::json::array();
    for (const auto& p : fit.points) j["points"].push_back({{"metric", p.metric}, {"error", p.error}});
    j["slope"] = fit.slope;
    j["intercept"] = fit.intercept;
    j["r2"] = fit.r2;
    return j;
}

void write_histogram_csv(std::ostream& out, const EmpiricalLaw& law, int bins, double lo, double hi,
                         const ReferenceKernel* ref) {
    if (bins < 1 || !(hi > lo)) throw ParameterError("histogram needs bins >= 1 and hi > lo");
    std::vector<std::size_t> count(static_cast<std::size_t>(bins), 0);
    const double w = (hi - lo) / bins;
    for (double x : law.sorted()) {
        if (x < lo || x > hi) continue;
        auto b = static_cast<std::size_t>(std::floor((x - lo) / w));
        count[std::min(b, count.size() - 1)]++;
    }
    out << "bin_left,bin_right,count,reference_density_at_midpoint\n";
    char buf[160];
    for (int b = 0; b < bins; ++b) {
        const double l = lo + b * w, r = lo + (b + 1) * w;
        if (ref) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%zu,%.17g\n", l, r, count[static_cast<std::size_t>(b)],
                          ref->density(0.5 * (l + r)));
        } else {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%zu,\n", l, r, count[static_cast<std::size_t>(b)]);
        }
        out << buf;
    }
}

}  // namespace stmca

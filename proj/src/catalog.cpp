#include "stmca/catalog.hpp"

#include <cmath>
#include <numbers>

#include "stmca/special.hpp"

namespace stmca::catalog {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw ParameterError(message);
}

double param(const std::map<std::string, double>& params, const std::map<std::string, double>& defaults,
             const std::string& key) {
    auto it = params.find(key);
    return it != params.end() ? it->second : defaults.at(key);
}

}  // namespace

DiffusionSpec bm() {
    DiffusionSpec spec;
    spec.domain = Interval(-kInf, kInf);
    spec.scale = ScaleFunction::identity();
    spec.speed = SpeedMeasure([](double) { return 2.0; });
    spec.catalog_id = "bm";
    spec.sde = SdeCoefficients{[](double) { return 0.0; }, [](double) { return 1.0; }};
    return spec;
}

DiffusionSpec sticky_bm(double rho) {
    require(rho > 0.0 && std::isfinite(rho), "stickiness rho must be positive");
    DiffusionSpec spec = bm();
    spec.speed = SpeedMeasure([](double) { return 2.0; }, {{0.0, rho}});
    spec.catalog_id = "sticky_bm";
    spec.params = {{"rho", rho}};
    spec.sde.reset();
    return spec;
}

DiffusionSpec skew_bm(double beta) {
    require(beta > 0.0 && beta < 1.0, "skewness beta must lie in (0, 1)");
    DiffusionSpec spec;
    spec.domain = Interval(-kInf, kInf);
    spec.scale = ScaleFunction::analytic([beta](double x) { return x >= 0.0 ? x / beta : x / (1.0 - beta); },
                                         [beta](double x) { return x >= 0.0 ? -std::log(beta) : -std::log1p(-beta); });
    spec.speed = SpeedMeasure([beta](double x) { return x > 0.0 ? 2.0 * beta : 2.0 * (1.0 - beta); });
    spec.breakpoints = {0.0};
    spec.catalog_id = "skew_bm";
    spec.params = {{"beta", beta}};
    return spec;
}

DiffusionSpec reflected_bm() {
    DiffusionSpec spec = bm();
    spec.domain = Interval(0.0, kInf, true, false);
    spec.left_boundary.kind = BoundaryKind::reflecting;
    spec.catalog_id = "reflected_bm";
    return spec;
}

DiffusionSpec ou(double theta, double mu, double sigma) {
    require(theta > 0.0 && sigma > 0.0, "OU needs theta > 0 and sigma > 0");
    const double k = theta / (sigma * sigma);
    const double rk = std::sqrt(k);
    const double log_front = std::log(2.0 * rk / std::sqrt(std::numbers::pi));
    DiffusionSpec spec;
    spec.domain = Interval(-kInf, kInf);
    spec.scale = ScaleFunction::analytic([rk, mu](double x) { return special::erfi(rk * (x - mu)); },
                                         [k, mu, log_front](double x) { return log_front + k * (x - mu) * (x - mu); });
    auto log_density = [k, mu, log_front, sigma](double x) {
        return std::log(2.0) - log_front - k * (x - mu) * (x - mu) - 2.0 * std::log(sigma);
    };
    spec.speed = SpeedMeasure([log_density](double x) { return std::exp(log_density(x)); }, {}, log_density);
    spec.catalog_id = "ou";
    spec.params = {{"theta", theta}, {"mu", mu}, {"sigma", sigma}};
    spec.sde = SdeCoefficients{[theta, mu](double x) { return theta * (mu - x); }, [sigma](double) { return sigma; }};
    return spec;
}

DiffusionSpec cir(double theta, double mu, double sigma, double anchor) {
    require(theta > 0.0 && mu > 0.0 && sigma > 0.0, "CIR needs theta, mu, sigma > 0");
    if (!(anchor > 0.0)) anchor = mu;
    SdeOptions options;
    options.window = Interval(0.0, std::max(4.0 * anchor, anchor + 25.0));
    options.panels = 1024;
    DiffusionSpec spec = from_sde([theta, mu](double x) { return theta * (mu - x); },
                                  [sigma](double x) { return sigma * std::sqrt(x); }, Interval(0.0, kInf), anchor,
                                  options);
    spec.catalog_id = "cir";
    spec.params = {{"theta", theta}, {"mu", mu}, {"sigma", sigma}};
    return spec;
}

DiffusionSpec bessel(double delta, BoundaryKind origin) {
    require(delta > 0.0 && std::isfinite(delta), "Bessel dimension must be positive");
    DiffusionSpec spec;
    if (delta < 2.0) {
        require(origin != BoundaryKind::unreachable, "the origin is reached for delta < 2");
        spec.domain = Interval(0.0, kInf, true, false);
        spec.left_boundary.kind = origin;
    } else {
        spec.domain = Interval(0.0, kInf);
    }
    const double e = 2.0 - delta;
    if (delta == 2.0) {
        spec.scale = ScaleFunction::analytic([](double x) { return std::log(x); }, [](double x) { return -std::log(x); });
    } else {
        spec.scale = ScaleFunction::analytic([e](double x) { return std::pow(x, e) / e; },
                                             [e](double x) { return (1.0 - e) * std::log(x); });
    }
    spec.speed = SpeedMeasure([delta](double x) { return 2.0 * std::pow(x, delta - 1.0); }, {},
                              [delta](double x) { return std::log(2.0) + (delta - 1.0) * std::log(x); });
    spec.singular_points = {0.0};
    spec.catalog_id = "bessel";
    spec.params = {{"delta", delta}, {"absorbing", origin == BoundaryKind::absorbing ? 1.0 : 0.0}};
    spec.sde = SdeCoefficients{[delta](double x) { return (delta - 1.0) / (2.0 * x); }, [](double) { return 1.0; }};
    return spec;
}

DiffusionSpec skew_bessel(double delta, double beta) {
    require(delta > 0.0 && delta < 2.0, "skew Bessel dimension must lie in (0, 2)");
    require(beta > 0.0 && beta < 1.0, "skewness beta must lie in (0, 1)");
    const double e = 2.0 - delta;
    DiffusionSpec spec;
    spec.domain = Interval(-kInf, kInf);
    spec.scale = ScaleFunction::analytic(
        [e, beta](double x) {
            return x > 0.0 ? std::pow(x, e) / (beta * e) : -std::pow(-x, e) / ((1.0 - beta) * e);
        },
        [e, beta](double x) {
            return x > 0.0 ? (1.0 - e) * std::log(x) - std::log(beta)
                           : (1.0 - e) * std::log(-x) - std::log1p(-beta);
        });
    spec.speed = SpeedMeasure(
        [delta, beta](double x) {
            const double w = x > 0.0 ? beta : 1.0 - beta;
            return 2.0 * w * std::pow(std::abs(x), delta - 1.0);
        });
    spec.breakpoints = {0.0};
    spec.singular_points = {0.0};
    spec.catalog_id = "skew_bessel";
    spec.params = {{"delta", delta}, {"beta", beta}};
    return spec;
}

std::vector<std::string> preset_names() {
    return {"bessel", "bm", "cir", "ou", "reflected_bm", "skew_bessel", "skew_bm", "sticky_bm"};
}

std::map<std::string, double> preset_parameters(const std::string& name) {
    if (name == "bm" || name == "reflected_bm") return {};
    if (name == "sticky_bm") return {{"rho", 1.0}};
    if (name == "skew_bm") return {{"beta", 0.5}};
    if (name == "ou") return {{"theta", 1.0}, {"mu", 0.0}, {"sigma", 1.0}};
    if (name == "cir") return {{"theta", 1.0}, {"mu", 1.0}, {"sigma", 1.0}, {"anchor", 0.0}};
    if (name == "bessel") return {{"delta", 1.5}, {"absorbing", 0.0}};
    if (name == "skew_bessel") return {{"delta", 1.5}, {"beta", 0.5}};
    throw ParameterError("unknown preset '" + name + "'");
}

DiffusionSpec make_preset(const std::string& name, const std::map<std::string, double>& params) {
    const auto defaults = preset_parameters(name);
    for (const auto& [key, value] : params) {
        if (!defaults.count(key)) throw ParameterError("preset '" + name + "' has no parameter '" + key + "'");
    }
    auto p = [&](const std::string& key) { return param(params, defaults, key); };
    if (name == "bm") return bm();
    if (name == "reflected_bm") return reflected_bm();
    if (name == "sticky_bm") return sticky_bm(p("rho"));
    if (name == "skew_bm") return skew_bm(p("beta"));
    if (name == "ou") return ou(p("theta"), p("mu"), p("sigma"));
    if (name == "cir") return cir(p("theta"), p("mu"), p("sigma"), p("anchor"));
    if (name == "bessel")
        return bessel(p("delta"), p("absorbing") != 0.0 ? BoundaryKind::absorbing : BoundaryKind::reflecting);
    return skew_bessel(p("delta"), p("beta"));
}

}  // namespace stmca::catalog

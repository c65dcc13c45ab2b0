#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "stmca/measure.hpp"

namespace stmca {

struct LawMeta {
    std::string spec_id;
    std::string grid_id;
    std::uint64_t seed = 0;
};

class EmpiricalLaw {
public:
    EmpiricalLaw(std::vector<double> samples, double horizon = 0.0, LawMeta meta = {});

    const std::vector<double>& sorted() const { return sorted_; }
    std::size_t size() const { return sorted_.size(); }
    double horizon() const { return horizon_; }
    const LawMeta& meta() const { return meta_; }
    double mean() const;
    double variance() const;  // divisor size() - 1

    // Midpoint-convention quantile: linear between (i - 1/2)/n, constant
    // beyond the first and last midpoints.
    double quantile(double s) const;

private:
    std::vector<double> sorted_;
    double horizon_;
    LawMeta meta_;
};

// L^p distance of the empirical quantile functions. Equal sizes use the
// sorted matching; unequal sizes integrate the midpoint-interpolated
// quantile functions.
double wasserstein_1d(const EmpiricalLaw& u, const EmpiricalLaw& v, double p);

// Law at a fixed time: density plus an optional atom.
class ReferenceKernel {
public:
    struct Parts {
        RealFn density;
        RealFn cdf;                  // includes the atom
        std::optional<Atom> atom;
        double lo;                   // the law puts mass < 1e-14 outside [lo, hi]
        double hi;
        std::vector<double> breaks;  // kinks or support edges inside [lo, hi]
        double mean;
        double variance;
    };
    explicit ReferenceKernel(Parts parts);

    double density(double x) const { return parts_.density(x); }
    double cdf(double x) const;
    const std::optional<Atom>& atom() const { return parts_.atom; }
    double lo() const { return parts_.lo; }
    double hi() const { return parts_.hi; }
    const std::vector<double>& breaks() const { return parts_.breaks; }
    double mean() const { return parts_.mean; }
    double variance() const { return parts_.variance; }
    double quantile(double s) const;
    // Integral of the density over [lo, hi] plus the atom mass.
    double total_mass() const;

private:
    Parts parts_;
};

// Supported ids: bm, ou, reflected_bm, skew_bm, sticky_bm, cir. Parameter
// names and defaults follow the catalog presets.
ReferenceKernel reference_kernel(const std::string& spec_id, const std::map<std::string, double>& params, double x0,
                                 double t);

// W_p between an empirical law and a reference law.
double wasserstein_to_reference(const EmpiricalLaw& law, const ReferenceKernel& ref, double p);

struct RatePoint {
    double metric;
    double error;
};

struct RateFit {
    std::vector<RatePoint> points;
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

// Least squares of log(error) on log(metric). Points are sorted by
// decreasing metric; at least three distinct positive metrics and positive
// errors are required.
RateFit rate_fit(std::vector<RatePoint> points);
nlohmann::json rate_fit_json(const RateFit& fit);

// bin_left,bin_right,count,reference_density_at_midpoint (last column empty
// without a reference).
void write_histogram_csv(std::ostream& out, const EmpiricalLaw& law, int bins, double lo, double hi,
                         const ReferenceKernel* ref = nullptr);

}  // namespace stmca

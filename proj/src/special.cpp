#include "stmca/special.hpp"

#include <gsl/gsl_sf_dawson.h>
#include <gsl/gsl_sf_erf.h>

#include <cmath>
#include <numbers>

namespace stmca::special {

double erfi(double z) {
    return 2.0 / std::sqrt(std::numbers::pi) * std::exp(z * z) * gsl_sf_dawson(z);
}

double erfcx(double z) {
    if (z < 0.0) return 2.0 * std::exp(z * z) - erfcx(-z);
    return std::exp(z * z + gsl_sf_log_erfc(z));
}

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

}  // namespace stmca::special

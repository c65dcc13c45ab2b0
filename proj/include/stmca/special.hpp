#pragma once

namespace stmca::special {

// Imaginary error function with the standard 2/sqrt(pi) normalization.
double erfi(double z);

// Scaled complementary error function exp(z^2) erfc(z), stable for large z.
double erfcx(double z);

double normal_pdf(double z);
double normal_cdf(double z);
// Upper tail 1 - normal_cdf(z) without cancellation.
double normal_sf(double z);

}  // namespace stmca::special

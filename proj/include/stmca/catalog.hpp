#pragma once

#include <map>
#include <string>
#include <vector>

#include "stmca/measure.hpp"

namespace stmca::catalog {

// Brownian motion with generator (1/2) d^2/dx^2: s(x) = x, m(dx) = 2 dx.
DiffusionSpec bm();
// Brownian motion with an atom of mass rho at 0.
DiffusionSpec sticky_bm(double rho);
// Skew Brownian motion: s(x) = x/beta (x >= 0), x/(1 - beta) (x < 0).
DiffusionSpec skew_bm(double beta);
// Brownian motion on [0, inf) reflected at 0.
DiffusionSpec reflected_bm();
DiffusionSpec ou(double theta, double mu, double sigma);
// Scale anchored at `anchor` (defaults to mu when not positive).
DiffusionSpec cir(double theta, double mu, double sigma, double anchor = 0.0);
// Bessel process of dimension delta on [0, inf). For delta < 2 the origin is
// reached and `origin` selects reflecting or absorbing behavior there.
DiffusionSpec bessel(double delta, BoundaryKind origin = BoundaryKind::reflecting);
DiffusionSpec skew_bessel(double delta, double beta);

// Builds a preset by name from a parameter map; missing parameters take the
// defaults listed by preset_parameters.
DiffusionSpec make_preset(const std::string& name, const std::map<std::string, double>& params);
std::vector<std::string> preset_names();
std::map<std::string, double> preset_parameters(const std::string& name);

}  // namespace stmca::catalog

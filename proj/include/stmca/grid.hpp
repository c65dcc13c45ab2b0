#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "stmca/measure.hpp"

namespace stmca {

struct Cell {
    double a;
    double center;
    double b;
};

struct GridMetrics {
    double max_cell;  // |g|
    double x_norm;    // max over cells of (s(b) - s(a)) m((a, b))
};

// Sorted finite set of points; consecutive triples are the cells. The first
// and last points are either closed domain endpoints or truncation edges.
class Grid {
public:
    Grid(std::vector<double> points, Interval domain);

    const std::vector<double>& points() const { return points_; }
    const Interval& domain() const { return domain_; }
    std::size_t size() const { return points_.size(); }
    double operator[](std::size_t j) const { return points_[j]; }

    // Cell centered at the interior index j (1 <= j <= size() - 2).
    Cell cell(std::size_t j) const;
    bool is_domain_endpoint(std::size_t j) const;

private:
    std::vector<double> points_;
    Interval domain_;
};

// Points anchor + k h inside the window, plus any closed domain endpoint that
// lies in the window.
Grid uniform_grid(const Interval& domain, double h, const Interval& window, double anchor = 0.0);

// {0} and +/-(h^2 / (2 rho) + k h / 2), k >= 0, inside the window.
Grid tuned_grid_sticky(double h, double rho, const Interval& window);

// {0} and +/-(h^2 / rho + k h), k >= 0.
Grid sticky_grid_g0(double h, double rho, const Interval& window);

// x_0 = 0, x_j = x_{j-1} + [h^2/(rho (x_{j-1}+1)) + h (1 - 1/(x_{j-1}+1))] while
// x_{j-1} < 1 and x_{j-1} + h afterwards, mirrored.
Grid sticky_grid_g1(double h, double rho, const Interval& window);

struct TuningOptions {
    double fp_tol = 1e-10;   // relative tolerance on the criterion value
    int max_bisections = 200;
    int panels = 8;           // quadrature panels per criterion evaluation
    std::size_t max_points = 20'000'000;
};

// Grid whose steps from x0 outward satisfy (s(y) - s(x)) m((x, y)) = h^2 / 2,
// capped at h. Atoms of the speed measure become grid points with neighbors
// at distance h^2 / rho on each side.
Grid tuned_grid_sde(const DiffusionSpec& spec, double h, double x0, const Interval& window,
                    const TuningOptions& options = {});

// Criterion value (s(y) - s(x)) m((x, y)) used by tuned_grid_sde.
double tuning_criterion(const DiffusionSpec& spec, double x, double y, int panels = 8);

GridMetrics metrics(const DiffusionSpec& spec, const Grid& grid);

struct Location {
    std::size_t index;
    Cell cell;  // for an end point the cell degenerates to {x_0, x_0, x_1}
    bool interior;
};

// Nearest grid point, ties to the lower index.
Location locate(const Grid& grid, double x);

void write_grid_csv(std::ostream& out, const Grid& grid);
Grid read_grid_csv(std::istream& in, const Interval& domain);

}  // namespace stmca

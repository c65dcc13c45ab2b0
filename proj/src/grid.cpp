#include "stmca/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "stmca/mesh.hpp"

namespace stmca {

Grid::Grid(std::vector<double> points, Interval domain) : points_(std::move(points)), domain_(domain) {
    if (points_.size() < 3) throw ParameterError("a grid needs at least three points");
    for (std::size_t j = 0; j < points_.size(); ++j) {
        if (!std::isfinite(points_[j]) || !domain_.contains(points_[j]))
            throw ParameterError("grid point outside the domain");
        if (j > 0 && !(points_[j] > points_[j - 1])) throw ParameterError("grid points must be strictly increasing");
    }
}

Cell Grid::cell(std::size_t j) const {
    if (j == 0 || j + 1 >= points_.size()) throw DomainError("cell index must be interior");
    return {points_[j - 1], points_[j], points_[j + 1]};
}

bool Grid::is_domain_endpoint(std::size_t j) const {
    const double x = points_[j];
    return (x == domain_.lower && domain_.lower_closed) || (x == domain_.upper && domain_.upper_closed);
}

namespace {

// Adds the closed domain endpoints lying in the window and drops points that
// coincide with them up to rounding.
std::vector<double> with_closed_endpoints(std::vector<double> pts, const Interval& domain, const Interval& window,
                                          double h) {
    const double snap = 1e-9 * h;
    auto add = [&](double e) {
        pts.erase(std::remove_if(pts.begin(), pts.end(), [&](double p) { return std::abs(p - e) <= snap; }),
                  pts.end());
        pts.push_back(e);
    };
    if (domain.lower_closed && domain.lower >= window.lower && domain.lower <= window.upper) add(domain.lower);
    if (domain.upper_closed && domain.upper >= window.lower && domain.upper <= window.upper) add(domain.upper);
    pts.erase(std::remove_if(pts.begin(), pts.end(), [&](double p) { return !domain.contains(p); }), pts.end());
    std::sort(pts.begin(), pts.end());
    return pts;
}

void check_window(double h, const Interval& window) {
    if (!(h > 0.0) || !std::isfinite(h)) throw ParameterError("grid step h must be positive");
    if (!window.finite()) throw ParameterError("grid window must be finite");
    if (h >= window.length()) throw ParameterError("degenerate grid: step is not smaller than the window");
}

Grid symmetric_grid(const std::vector<double>& positive, const Interval& window) {
    std::vector<double> pts;
    for (auto it = positive.rbegin(); it != positive.rend(); ++it) {
        if (-*it >= window.lower) pts.push_back(-*it);
    }
    if (0.0 >= window.lower && 0.0 <= window.upper) pts.push_back(0.0);
    for (double p : positive) {
        if (p <= window.upper) pts.push_back(p);
    }
    Interval domain(-kInf, kInf);
    return Grid(pts, domain);
}

}  // namespace

Grid uniform_grid(const Interval& domain, double h, const Interval& window, double anchor) {
    check_window(h, window);
    const double snap = 1e-9 * h;
    const auto k_lo = static_cast<long long>(std::ceil((window.lower - anchor) / h - 1e-9));
    const auto k_hi = static_cast<long long>(std::floor((window.upper - anchor) / h + 1e-9));
    std::vector<double> pts;
    for (long long k = k_lo; k <= k_hi; ++k) {
        double p = anchor + static_cast<double>(k) * h;
        if (std::abs(p - window.lower) <= snap) p = window.lower;
        if (std::abs(p - window.upper) <= snap) p = window.upper;
        if (std::abs(p) <= snap) p = 0.0;
        pts.push_back(p);
    }
    return Grid(with_closed_endpoints(std::move(pts), domain, window, h), domain);
}

Grid tuned_grid_sticky(double h, double rho, const Interval& window) {
    check_window(h, window);
    if (!(rho > 0.0)) throw ParameterError("stickiness rho must be positive");
    const double first = h * h / (2.0 * rho);
    std::vector<double> positive;
    const double reach = std::max(std::abs(window.lower), std::abs(window.upper));
    for (long long k = 0;; ++k) {
        const double p = first + static_cast<double>(k) * h / 2.0;
        if (p > reach) break;
        positive.push_back(p);
    }
    return symmetric_grid(positive, window);
}

Grid sticky_grid_g0(double h, double rho, const Interval& window) {
    check_window(h, window);
    if (!(rho > 0.0)) throw ParameterError("stickiness rho must be positive");
    const double first = h * h / rho;
    std::vector<double> positive;
    const double reach = std::max(std::abs(window.lower), std::abs(window.upper));
    for (long long k = 0;; ++k) {
        const double p = first + static_cast<double>(k) * h;
        if (p > reach) break;
        positive.push_back(p);
    }
    return symmetric_grid(positive, window);
}

Grid sticky_grid_g1(double h, double rho, const Interval& window) {
    check_window(h, window);
    if (!(rho > 0.0)) throw ParameterError("stickiness rho must be positive");
    std::vector<double> positive;
    const double reach = std::max(std::abs(window.lower), std::abs(window.upper));
    double x = 0.0;
    while (true) {
        const double step = x < 1.0 ? h * h / rho / (x + 1.0) + h * (1.0 - 1.0 / (x + 1.0)) : h;
        x += step;
        if (x > reach) break;
        positive.push_back(x);
    }
    return symmetric_grid(positive, window);
}

double tuning_criterion(const DiffusionSpec& spec, double x, double y, int panels) {
    if (x == y) return 0.0;
    return scale_speed_product(spec, std::min(x, y), std::max(x, y), panels);
}

namespace {

// Next point beyond x in direction dir (+1 or -1), never crossing `limit`
// (an atom or the window edge) and never stepping more than h.
double tuned_step(const DiffusionSpec& spec, double x, double dir, double h, double limit, const TuningOptions& opt) {
    const double target = 0.5 * h * h;
    const double far = x + dir * h;
    const bool limited = dir > 0 ? far >= limit : far <= limit;
    const double end = limited ? limit : far;
    const double f_end = tuning_criterion(spec, x, end, opt.panels);
    if (f_end <= target) return end;  // cap (or limit) wins
    double lo = x, hi = end;          // criterion(lo) <= target < criterion(hi)
    for (int it = 0; it < opt.max_bisections; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) return lo == x ? hi : lo;
        const double f = tuning_criterion(spec, x, mid, opt.panels);
        if (f <= target) lo = mid; else hi = mid;
        if (f <= target && target - f <= opt.fp_tol * target) return lo;
    }
    throw TuningError("tuning bisection did not converge", x);
}

}  // namespace

Grid tuned_grid_sde(const DiffusionSpec& spec, double h, double x0, const Interval& window,
                    const TuningOptions& options) {
    check_window(h, window);
    if (!(x0 >= window.lower && x0 <= window.upper)) throw DomainError("tuning start point outside the window");
    const Interval& dom = spec.domain;
    const double lo_edge = std::max(window.lower, dom.lower);
    const double hi_edge = std::min(window.upper, dom.upper);
    std::vector<double> atoms;
    for (const Atom& a : spec.speed.atoms()) atoms.push_back(a.location);
    auto atom_mass = [&](double z) { return spec.speed.atom_mass_at(z); };

    std::vector<double> pts{x0};
    for (double dir : {1.0, -1.0}) {
        const double edge = dir > 0 ? hi_edge : lo_edge;
        const bool edge_reachable = dir > 0 ? (dom.upper_closed && edge == dom.upper)
                                            : (dom.lower_closed && edge == dom.lower);
        double x = x0;
        bool atom_at_x = atom_mass(x0) > 0.0;
        while (true) {
            if (pts.size() > options.max_points) throw TuningError("tuned grid exceeded the point budget", x);
            double next;
            if (atom_at_x) {
                next = x + dir * h * h / atom_mass(x);
                atom_at_x = false;
            } else {
                // nearest atom strictly beyond x in this direction
                double limit = edge;
                for (double z : atoms) {
                    if (dir > 0 ? (z > x && z < limit) : (z < x && z > limit)) limit = z;
                }
                next = tuned_step(spec, x, dir, h, limit, options);
                if (next == limit && limit != edge) {
                    const double before = limit - dir * h * h / atom_mass(limit);
                    if (dir > 0 ? before > x : before < x) pts.push_back(before);
                    atom_at_x = true;
                }
            }
            if (std::abs(next - edge) <= 1e-9 * h) next = edge;
            if (dir > 0 ? next >= edge : next <= edge) {
                if (edge_reachable || std::abs(next - edge) <= 1e-12 * std::max(1.0, std::abs(edge))) {
                    if (edge != x) pts.push_back(edge);
                }
                break;
            }
            if (!(dir > 0 ? next > x : next < x)) throw TuningError("tuned grid failed to advance", x);
            pts.push_back(next);
            x = next;
        }
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return Grid(pts, dom);
}

GridMetrics metrics(const DiffusionSpec& spec, const Grid& grid) {
    GridMetrics m{0.0, 0.0};
    const auto& p = grid.points();
    for (std::size_t j = 1; j + 1 < p.size(); ++j) {
        m.max_cell = std::max(m.max_cell, p[j + 1] - p[j - 1]);
        m.x_norm = std::max(m.x_norm, scale_speed_product(spec, p[j - 1], p[j + 1]));
    }
    // Half-open boundary cells [x_0, x_1) at closed endpoints.
    auto boundary = [&](std::size_t j, std::size_t k) {
        CellMesh::Options opt;
        opt.panels = 16;
        opt.graded.push_back(p[j]);
        opt.include_lo_atom = j < k;
        opt.include_hi_atom = j > k;
        const CellMesh mesh(spec, std::min(p[j], p[k]), std::max(p[j], p[k]), opt);
        m.max_cell = std::max(m.max_cell, std::abs(p[k] - p[j]));
        m.x_norm = std::max(m.x_norm, mesh.total_u() * mesh.total_mass());
    };
    if (grid.is_domain_endpoint(0)) boundary(0, 1);
    if (grid.is_domain_endpoint(p.size() - 1)) boundary(p.size() - 1, p.size() - 2);
    return m;
}

Location locate(const Grid& grid, double x) {
    const auto& p = grid.points();
    if (!(x >= p.front() && x <= p.back())) throw DomainError("point outside the grid window");
    auto it = std::lower_bound(p.begin(), p.end(), x);
    std::size_t j = static_cast<std::size_t>(it - p.begin());
    if (j > 0 && (j == p.size() || x - p[j - 1] <= p[j] - x)) j = j - 1;
    Location loc;
    loc.index = j;
    loc.interior = j > 0 && j + 1 < p.size();
    if (loc.interior) {
        loc.cell = grid.cell(j);
    } else if (j == 0) {
        loc.cell = {p[0], p[0], p[1]};
    } else {
        loc.cell = {p[j - 1], p[j], p[j]};
    }
    return loc;
}

void write_grid_csv(std::ostream& out, const Grid& grid) {
    out << "x\n";
    char buf[64];
    for (double p : grid.points()) {
        std::snprintf(buf, sizeof buf, "%.17g\n", p);
        out << buf;
    }
}

Grid read_grid_csv(std::istream& in, const Interval& domain) {
    std::vector<double> pts;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream is(line);
        is.imbue(std::locale::classic());
        double v;
        if (!(is >> v)) {
            if (pts.empty()) continue;  // header line
            throw ParameterError("grid file line " + std::to_string(line_no) + " is not a number");
        }
        pts.push_back(v);
    }
    return Grid(pts, domain);
}

}  // namespace stmca

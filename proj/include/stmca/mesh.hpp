#pragma once

#include <vector>

#include "stmca/measure.hpp"
#include "stmca/quadrature.hpp"

namespace stmca {

// Quadrature discretization of a closed interval [lo, hi] for integrals
// against the speed measure, expressed in a local chart. Panels are split at
// every break in `breaks`, at interior atoms and at the spec's break and
// singular points; panels touching a singular point are graded toward it.
class CellMesh {
public:
    struct Options {
        int panels = 32;
        int graded_levels = 20;
        std::vector<double> breaks;  // extra split points inside (lo, hi)
        std::vector<double> graded;  // extra grading targets
        bool include_lo_atom = false;
        bool include_hi_atom = false;
        double chart_center = kInf;  // defaults to the midpoint
    };

    struct MeshAtom {
        double location;
        double mass;  // chart mass
        double u;
        double w;
    };

    CellMesh(const DiffusionSpec& spec, double lo, double hi, const Options& options);

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    const LocalChart& chart() const { return chart_; }
    const std::vector<quad::Panel>& panels() const { return panels_; }
    std::size_t node_count() const { return nodes_.size(); }

    // Flat arrays over all panels, kOrder entries per panel in order.
    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& weights() const { return weights_; }  // dx weights
    const std::vector<double>& u() const { return u_; }              // chart s(node) - s(lo)
    const std::vector<double>& w() const { return w_; }              // chart s(hi) - s(node)
    const std::vector<double>& density() const { return density_; }  // chart speed density
    const std::vector<double>& panel_u_lo() const { return panel_u_lo_; }
    const std::vector<MeshAtom>& atoms() const { return atoms_; }

    double total_u() const { return total_u_; }
    // Chart s(x) - s(lo) at a panel boundary; x must be a break or an endpoint.
    double u_at_break(double x) const;
    // Chart s(hi) - s(x) at a panel boundary, accumulated from the right end.
    double w_at_break(double x) const;
    // Speed mass of the open interval (lo, hi) plus the included endpoint atoms.
    double total_mass() const;

private:
    double lo_;
    double hi_;
    LocalChart chart_;
    std::vector<quad::Panel> panels_;
    std::vector<double> nodes_, weights_, u_, w_, density_, panel_u_lo_, panel_w_lo_;
    std::vector<MeshAtom> atoms_;
    double total_u_ = 0.0;
};

}  // namespace stmca

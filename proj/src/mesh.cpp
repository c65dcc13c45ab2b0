#include "stmca/mesh.hpp"

#include <algorithm>
#include <cmath>

namespace stmca {

CellMesh::CellMesh(const DiffusionSpec& spec, double lo, double hi, const Options& options)
    : lo_(lo), hi_(hi) {
    if (!(lo < hi)) throw DomainError("cell mesh needs lo < hi");

    std::vector<double> breaks{lo, hi};
    auto add_inside = [&](double p) {
        if (p > lo && p < hi) breaks.push_back(p);
    };
    for (double p : options.breaks) add_inside(p);
    for (double p : spec.breakpoints) add_inside(p);
    for (double p : spec.singular_points) add_inside(p);
    for (const Atom& atom : spec.speed.atoms()) add_inside(atom.location);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end(), quad::same_point), breaks.end());

    std::vector<double> graded = options.graded;
    for (double p : spec.singular_points) {
        if (p >= lo && p <= hi) graded.push_back(p);
    }

    quad::PartitionOptions popt;
    popt.panels = options.panels;
    popt.graded_levels = options.graded_levels;
    panels_ = quad::partition(breaks, graded, popt);

    const double center = std::isfinite(options.chart_center) ? options.chart_center : 0.5 * (lo + hi);
    chart_ = make_chart(spec, center);

    const auto& rule = quad::gauss_legendre();
    const std::size_t n = panels_.size() * quad::kOrder;
    nodes_.resize(n);
    weights_.resize(n);
    u_.resize(n);
    density_.resize(n);
    panel_u_lo_.resize(panels_.size());

    const double s_lo = chart_.closed ? spec.scale(lo) : 0.0;
    const double s_hi = chart_.closed ? spec.scale(hi) : 0.0;
    w_.resize(n);
    panel_w_lo_.resize(panels_.size());
    std::vector<double> panel_total(panels_.size(), 0.0);
    double running = 0.0;
    for (std::size_t p = 0; p < panels_.size(); ++p) {
        const auto& panel = panels_[p];
        const double hw = panel.half_width();
        const double mid = panel.mid();
        quad::NodeVector deriv;
        for (int i = 0; i < quad::kOrder; ++i) {
            const std::size_t k = p * quad::kOrder + static_cast<std::size_t>(i);
            const double z = mid + hw * rule.nodes(i);
            nodes_[k] = z;
            weights_[k] = hw * rule.weights(i);
            const double d = chart_density(spec, chart_, z);
            if (!std::isfinite(d) || d < 0.0) throw QuadratureError("speed density is not finite", z);
            density_[k] = d;
            if (!chart_.closed) {
                deriv(i) = chart_scale_derivative(spec, chart_, z);
                if (!std::isfinite(deriv(i))) throw QuadratureError("scale derivative is not finite", z);
            }
        }
        if (chart_.closed) {
            panel_u_lo_[p] = p == 0 ? 0.0 : spec.scale(panel.lo) - s_lo;
            panel_w_lo_[p] = p == 0 ? s_hi - s_lo : s_hi - spec.scale(panel.lo);
            for (int i = 0; i < quad::kOrder; ++i) {
                const std::size_t k = p * quad::kOrder + static_cast<std::size_t>(i);
                u_[k] = spec.scale(nodes_[k]) - s_lo;
                w_[k] = s_hi - spec.scale(nodes_[k]);
            }
        } else {
            panel_u_lo_[p] = running;
            const quad::NodeVector cum = hw * (rule.cumulative * deriv);
            panel_total[p] = hw * rule.weights.dot(deriv);
            for (int i = 0; i < quad::kOrder; ++i) {
                const std::size_t k = p * quad::kOrder + static_cast<std::size_t>(i);
                u_[k] = running + cum(i);
                w_[k] = panel_total[p] - cum(i);  // completed below with the panels to the right
            }
            running += panel_total[p];
        }
    }
    if (!chart_.closed) {
        double suffix = 0.0;
        for (std::size_t p = panels_.size(); p-- > 0;) {
            for (int i = 0; i < quad::kOrder; ++i) w_[p * quad::kOrder + static_cast<std::size_t>(i)] += suffix;
            suffix += panel_total[p];
            panel_w_lo_[p] = suffix;
        }
    }
    total_u_ = chart_.closed ? s_hi - s_lo : running;
    if (!std::isfinite(total_u_) || !(total_u_ > 0.0))
        throw QuadratureError("scale increment over the cell is not finite and positive", lo);

    for (const Atom& atom : spec.speed.atoms()) {
        const bool inside = atom.location > lo && atom.location < hi;
        const bool at_lo = options.include_lo_atom && atom.location == lo;
        const bool at_hi = options.include_hi_atom && atom.location == hi;
        if (inside || at_lo || at_hi)
            atoms_.push_back({atom.location, chart_atom_mass(chart_, atom.mass), u_at_break(atom.location),
                              w_at_break(atom.location)});
    }
}

double CellMesh::u_at_break(double x) const {
    if (x == lo_) return 0.0;
    if (x == hi_) return total_u_;
    for (std::size_t p = 0; p < panels_.size(); ++p) {
        if (quad::same_point(panels_[p].lo, x)) return panel_u_lo_[p];
    }
    throw ContractError("u_at_break called with a point that is not a panel boundary");
}

double CellMesh::w_at_break(double x) const {
    if (x == lo_) return total_u_;
    if (x == hi_) return 0.0;
    for (std::size_t p = 0; p < panels_.size(); ++p) {
        if (quad::same_point(panels_[p].lo, x)) return panel_w_lo_[p];
    }
    throw ContractError("w_at_break called with a point that is not a panel boundary");
}

double CellMesh::total_mass() const {
    double m = 0.0;
    for (std::size_t k = 0; k < nodes_.size(); ++k) m += density_[k] * weights_[k];
    for (const auto& atom : atoms_) m += atom.mass;
    return m;
}

}  // namespace stmca

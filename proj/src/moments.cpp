#include "stmca/moments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <limits>
#include <optional>
#include <set>
#include <string>

#include "stmca/mesh.hpp"
#include "stmca/quadrature.hpp"

namespace stmca {

namespace {

constexpr double kOneSided = 1e-12;

void require_cell(double a, double x, double b) {
    if (!(a < b) || !(x >= a && x <= b)) throw DomainError("point outside the cell [a, b]");
}

// ---------------------------------------------------------------------------
// Discretized Green operator on a CellMesh.

struct Field {
    std::vector<double> nodes;
    std::vector<double> atoms;
    double at_x = 0.0;
};

class GreenOperator {
public:
    GreenOperator(const CellMesh& mesh, double x) : mesh_(mesh), x_(x) {}

    Field apply(const Field& f) const {
        const auto& rule = quad::gauss_legendre();
        const auto& panels = mesh_.panels();
        const auto& atoms = mesh_.atoms();
        const auto& u = mesh_.u();
        const auto& w = mesh_.w();
        const auto& d = mesh_.density();
        const double U = mesh_.total_u();
        const std::size_t n = mesh_.node_count();

        std::vector<double> gA(n), gC(n);
        double totA = 0.0, totC = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            gA[i] = u[i] * f.nodes[i] * d[i];
            gC[i] = w[i] * f.nodes[i] * d[i];
        }
        std::vector<double> panelA(panels.size()), panelC(panels.size());
        for (std::size_t p = 0; p < panels.size(); ++p) {
            double sa = 0.0, sc = 0.0;
            for (int i = 0; i < quad::kOrder; ++i) {
                const std::size_t k = p * quad::kOrder + static_cast<std::size_t>(i);
                sa += rule.weights(i) * gA[k];
                sc += rule.weights(i) * gC[k];
            }
            panelA[p] = panels[p].half_width() * sa;
            panelC[p] = panels[p].half_width() * sc;
            totA += panelA[p];
            totC += panelC[p];
        }
        std::vector<double> atomA(atoms.size()), atomC(atoms.size());
        for (std::size_t j = 0; j < atoms.size(); ++j) {
            atomA[j] = atoms[j].u * atoms[j].mass * f.atoms[j];
            atomC[j] = atoms[j].w * atoms[j].mass * f.atoms[j];
            totA += atomA[j];
            totC += atomC[j];
        }

        // G(x, y) = u(min) w(max) / U with w = U - u kept separately.
        auto combine = [U, totC](double uu, double ww, double A, double Cprefix) {
            return (ww * A + uu * (totC - Cprefix)) / U;
        };

        Field out;
        out.nodes.resize(n);
        out.atoms.resize(atoms.size());
        double runA = 0.0, runC = 0.0;
        std::size_t ia = 0;
        for (std::size_t p = 0; p < panels.size(); ++p) {
            while (ia < atoms.size() && atoms[ia].location <= panels[p].lo) {
                runA += atomA[ia];
                runC += atomC[ia];
                out.atoms[ia] = combine(atoms[ia].u, atoms[ia].w, runA, runC);
                ++ia;
            }
            quad::NodeVector va, vc;
            for (int i = 0; i < quad::kOrder; ++i) {
                const std::size_t k = p * quad::kOrder + static_cast<std::size_t>(i);
                va(i) = gA[k];
                vc(i) = gC[k];
            }
            const double hw = panels[p].half_width();
            const quad::NodeVector cumA = hw * (rule.cumulative * va);
            const quad::NodeVector cumC = hw * (rule.cumulative * vc);
            for (int i = 0; i < quad::kOrder; ++i) {
                const std::size_t k = p * quad::kOrder + static_cast<std::size_t>(i);
                out.nodes[k] = combine(u[k], w[k], runA + cumA(i), runC + cumC(i));
            }
            runA += panelA[p];
            runC += panelC[p];
        }
        for (; ia < atoms.size(); ++ia) {
            runA += atomA[ia];
            runC += atomC[ia];
            out.atoms[ia] = combine(atoms[ia].u, atoms[ia].w, runA, runC);
        }

        // Evaluation at x from full panel sums.
        double xA = 0.0, xC = 0.0;
        for (std::size_t p = 0; p < panels.size(); ++p) {
            if (panels[p].hi <= x_ || quad::same_point(panels[p].hi, x_)) {
                xA += panelA[p];
                xC += panelC[p];
            }
        }
        for (std::size_t j = 0; j < atoms.size(); ++j) {
            if (atoms[j].location <= x_) {
                xA += atomA[j];
                xC += atomC[j];
            }
        }
        out.at_x = combine(mesh_.u_at_break(x_), mesh_.w_at_break(x_), xA, xC);
        return out;
    }

private:
    const CellMesh& mesh_;
    double x_;
};

CellMesh cell_mesh(const DiffusionSpec& spec, double a, double x, double b, int n_panels) {
    CellMesh::Options opt;
    opt.panels = n_panels;
    if (x > a && x < b) opt.breaks.push_back(x);
    if (x > a && x < b) opt.chart_center = x;
    return CellMesh(spec, a, b, opt);
}

Field base_field(const CellMesh& mesh, double x, MomentBase base) {
    const double U = mesh.total_u();
    auto value = [&](double uu, double ww) { return (base == MomentBase::upper ? uu : ww) / U; };
    Field f;
    f.nodes.reserve(mesh.node_count());
    for (std::size_t i = 0; i < mesh.node_count(); ++i) f.nodes.push_back(value(mesh.u()[i], mesh.w()[i]));
    for (const auto& atom : mesh.atoms()) f.atoms.push_back(value(atom.u, atom.w));
    f.at_x = value(mesh.u_at_break(x), mesh.w_at_break(x));
    return f;
}

Field scaled(Field f, double c) {
    for (double& v : f.nodes) v *= c;
    for (double& v : f.atoms) v *= c;
    f.at_x *= c;
    return f;
}

// ---------------------------------------------------------------------------
// Closed forms.

double bm_v1(double a, double x, double b) {
    const double L = b - a;
    const double l = x - a, r = b - x;
    return l * r * (2.0 / 3.0 * l * l / (L * L) + r / L - 2.0 / 3.0 * r * r / (L * L));
}

double bm_v1_bar(double a, double x, double b) {
    const double L = b - a;
    const double l = x - a, r = b - x;
    return l * r * (2.0 / 3.0 * r * r / (L * L) + l / L - 2.0 / 3.0 * l * l / (L * L));
}

// c0 + c1 (y - r) + c2 (y - r)^2
struct Quadratic {
    double r, c0, c1, c2;
};

// Integral over t in [0, W] of (p0 + p1 t + p2 t^2) (c + t)^q, c >= 0.
double shifted_power_integral(double p0, double p1, double p2, double c, double W, double q) {
    const double p[3] = {p0, p1, p2};
    if (W <= 0.0) return 0.0;
    if (c == 0.0) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) {
            const double e = k + q + 1.0;
            if (!(e > 0.0)) throw QuadratureError("power-law speed density is not integrable at 0", 0.0);
            s += p[k] * std::pow(W, e) / e;
        }
        return s;
    }
    if (c > 2.0 * W) {
        // (c + t)^q = c^q sum_n binom(q, n) (t / c)^n
        const double ratio = W / c;
        double total = 0.0;
        for (int k = 0; k < 3; ++k) {
            double coeff = 1.0, pw = 1.0, s = 0.0;
            for (int n = 0; n < 400; ++n) {
                const double term = coeff * pw / (k + n + 1.0);
                s += term;
                if (std::abs(term) <= 1e-18 * std::abs(s)) break;
                coeff *= (q - n) / (n + 1.0);
                pw *= ratio;
            }
            total += p[k] * std::pow(W, k) * s;
        }
        return std::pow(c, q) * W * total;
    }
    // Substitute z = c + t and integrate monomials z^(k+q).
    const double r0 = p0 - p1 * c + p2 * c * c;
    const double r1 = p1 - 2.0 * p2 * c;
    const double r2 = p2;
    const double r[3] = {r0, r1, r2};
    const double lg = std::log1p(W / c);
    double s = 0.0;
    for (int k = 0; k < 3; ++k) {
        const double e = k + q + 1.0;
        const double ce = std::pow(c, e);
        const double diff = std::abs(e) < 1e-14 ? ce * lg : ce * std::expm1(e * lg) / e;
        s += r[k] * diff;
    }
    return s;
}

// Integral over [y1, y2] of P(y) C |y|^q with [y1, y2] on one side of 0.
double power_segment(const Quadratic& P, double y1, double y2, double q, double C) {
    if (y2 <= y1 || C == 0.0) return 0.0;
    if (y1 >= 0.0) {
        const double dd = y1 - P.r;
        const double p0 = P.c0 + P.c1 * dd + P.c2 * dd * dd;
        const double p1 = P.c1 + 2.0 * P.c2 * dd;
        return C * shifted_power_integral(p0, p1, P.c2, y1, y2 - y1, q);
    }
    // y = y2 - t, |y| = -y2 + t
    const double dd = y2 - P.r;
    const double p0 = P.c0 + P.c1 * dd + P.c2 * dd * dd;
    const double p1 = -P.c1 - 2.0 * P.c2 * dd;
    return C * shifted_power_integral(p0, p1, P.c2, -y2, y2 - y1, q);
}

struct PowerLaw {
    double q;
    double c_pos;
    double c_neg;
};

double power_integral(const Quadratic& P, double y1, double y2, const PowerLaw& law) {
    if (y2 <= 0.0) return power_segment(P, y1, y2, law.q, law.c_neg);
    if (y1 >= 0.0) return power_segment(P, y1, y2, law.q, law.c_pos);
    return power_segment(P, y1, 0.0, law.q, law.c_neg) + power_segment(P, 0.0, y2, law.q, law.c_pos);
}

// Natural-scale speed density of the catalog specs whose pushforward is a
// two-sided power law C_{+/-} |y|^q.
std::optional<PowerLaw> power_law_of(const DiffusionSpec& spec) {
    if (spec.catalog_id == "skew_bm") {
        const double beta = spec.params.at("beta");
        return PowerLaw{0.0, 2.0 * beta * beta, 2.0 * (1.0 - beta) * (1.0 - beta)};
    }
    if (spec.catalog_id == "skew_bessel" || spec.catalog_id == "bessel") {
        const double delta = spec.params.at("delta");
        if (delta == 2.0) return std::nullopt;
        const double beta = spec.catalog_id == "bessel" ? 1.0 : spec.params.at("beta");
        const double e = 2.0 - delta;
        const double q = (2.0 * delta - 2.0) / e;
        if (delta > 2.0) return PowerLaw{q, 0.0, 2.0 * std::pow(-e, q)};
        const double cpos = 2.0 * beta * beta * std::pow(beta * e, q);
        const double cneg = beta < 1.0 ? 2.0 * (1.0 - beta) * (1.0 - beta) * std::pow((1.0 - beta) * e, q) : 0.0;
        return PowerLaw{q, cpos, cneg};
    }
    return std::nullopt;
}

std::pair<double, double> power_law_moments(const DiffusionSpec& spec, const PowerLaw& law, double a, double x,
                                            double b) {
    const double A = spec.scale(a), X = spec.scale(x), B = spec.scale(b);
    const double L = B - A;
    const Quadratic left_sq{A, 0.0, 0.0, 1.0};    // (y - A)^2
    const Quadratic middle{A, 0.0, L, -1.0};      // (B - y)(y - A)
    const Quadratic right_sq{B, 0.0, 0.0, 1.0};   // (B - y)^2
    const double wl = (B - X) / (L * L);
    const double wr = (X - A) / (L * L);
    const double v1 = wl * power_integral(left_sq, A, X, law) + wr * power_integral(middle, X, B, law);
    const double v1b = wl * power_integral(middle, A, X, law) + wr * power_integral(right_sq, X, B, law);
    return {v1, v1b};
}

bool power_law_cell_ok(const DiffusionSpec& spec, double a) {
    // Closed forms assume the cell lies in the part of the line where the
    // natural-scale density is the stated power law; that is the whole domain.
    return spec.domain.contains(a) || a == spec.domain.lower;
}

CellQuantities assemble(double a, double x, double b, double v0v, double v1, double v1b,
                        double v0_bar = std::numeric_limits<double>::quiet_NaN()) {
    CellQuantities c;
    c.a = a;
    c.x = x;
    c.b = b;
    c.v0 = std::clamp(v0v, 0.0, 1.0);
    c.v1 = std::max(v1, 0.0);
    c.v1_bar = std::max(v1b, 0.0);
    c.p_plus = c.v0;
    c.p_minus = std::isnan(v0_bar) ? 1.0 - c.v0 : std::clamp(v0_bar, 0.0, 1.0);
    const double tau = c.v1 + c.v1_bar;
    if (c.v0 < kOneSided) {
        c.t_plus = tau;
        c.one_sided_plus = true;
    } else {
        c.t_plus = c.v1 / c.v0;
    }
    if (c.p_minus < kOneSided) {
        c.t_minus = tau;
        c.one_sided_minus = true;
    } else {
        c.t_minus = c.v1_bar / c.p_minus;
    }
    return c;
}

}  // namespace

GreenEvaluator::GreenEvaluator(double a, double b, ScaleFunction scale)
    : a_(a), b_(b), scale_(std::move(scale)), sa_(scale_(a)), sb_(scale_(b)) {
    if (!(a < b)) throw DomainError("Green function needs a < b");
}

double GreenEvaluator::operator()(double x, double y) const {
    if (x < a_ || x > b_ || y < a_ || y > b_) throw DomainError("Green function argument outside [a, b]");
    const double lo = std::min(x, y), hi = std::max(x, y);
    return (scale_(lo) - sa_) * (sb_ - scale_(hi)) / (sb_ - sa_);
}

double green(const GreenEvaluator& ge, double x, double y) { return ge(x, y); }

double v0(const DiffusionSpec& spec, double a, double x, double b) {
    require_cell(a, x, b);
    if (x == a) return 0.0;
    if (x == b) return 1.0;
    if (spec.scale.closed_values()) {
        const double sa = spec.scale(a);
        return (spec.scale(x) - sa) / (spec.scale(b) - sa);
    }
    const CellMesh mesh = cell_mesh(spec, a, x, b, 32);
    return mesh.u_at_break(x) / mesh.total_u();
}

MomentProfile moment_profile(const DiffusionSpec& spec, double a, double x, double b, int kmax, int n_panels) {
    require_cell(a, x, b);
    if (kmax < 0) throw ParameterError("moment order must be nonnegative");
    MomentProfile out;
    if (x == a || x == b) {
        out.v.assign(static_cast<std::size_t>(kmax) + 1, 0.0);
        out.v_bar.assign(static_cast<std::size_t>(kmax) + 1, 0.0);
        out.v[0] = x == b ? 1.0 : 0.0;
        out.v_bar[0] = 1.0 - out.v[0];
        return out;
    }
    const CellMesh mesh = cell_mesh(spec, a, x, b, n_panels);
    const GreenOperator G(mesh, x);
    for (MomentBase base : {MomentBase::upper, MomentBase::lower}) {
        auto& target = base == MomentBase::upper ? out.v : out.v_bar;
        Field f = base_field(mesh, x, base);
        target.push_back(f.at_x);
        for (int k = 1; k <= kmax; ++k) {
            f = scaled(G.apply(f), static_cast<double>(k));
            target.push_back(f.at_x);
        }
    }
    Field one = base_field(mesh, x, MomentBase::upper);
    std::fill(one.nodes.begin(), one.nodes.end(), 1.0);
    std::fill(one.atoms.begin(), one.atoms.end(), 1.0);
    one.at_x = 1.0;
    out.mean_exit = G.apply(one).at_x;
    return out;
}

double vk_quadrature(const DiffusionSpec& spec, double a, double x, double b, int k, int n_panels,
                     MomentBase base) {
    if (k < 1) throw ParameterError("vk_quadrature needs k >= 1");
    if (n_panels < 8) throw ParameterError("vk_quadrature needs at least 8 panels");
    const MomentProfile profile = moment_profile(spec, a, x, b, k, n_panels);
    return base == MomentBase::upper ? profile.v[static_cast<std::size_t>(k)]
                                     : profile.v_bar[static_cast<std::size_t>(k)];
}

double mean_exit_time(const DiffusionSpec& spec, double a, double x, double b, int n_panels) {
    return moment_profile(spec, a, x, b, 0, n_panels).mean_exit;
}

bool has_closed_form(const DiffusionSpec& spec) {
    static const std::set<std::string> ids{"bm", "sticky_bm", "skew_bm", "reflected_bm",
                                           "bessel", "skew_bessel", "ou", "cir"};
    return ids.count(spec.catalog_id) > 0;
}

CellQuantities cell_quantities(const DiffusionSpec& spec, double a, double x, double b, Method method,
                               int quad_panels) {
    if (!(a < x && x < b)) throw DomainError("cell quantities need a < x < b");
    if (method == Method::closed_form) {
        if (!has_closed_form(spec))
            throw UnsupportedError("closed-form cell quantities are only available for catalog diffusions");
        const std::string& id = spec.catalog_id;
        if (id == "bm" || id == "reflected_bm" || id == "sticky_bm") {
            double v1 = bm_v1(a, x, b);
            double v1b = bm_v1_bar(a, x, b);
            const double p = (x - a) / (b - a);
            if (id == "sticky_bm" && a < 0.0 && 0.0 < b) {
                const double rho = spec.params.at("rho");
                const double g = (std::min(x, 0.0) - a) * (b - std::max(x, 0.0)) / (b - a);
                const double v00 = -a / (b - a);
                v1 += rho * g * v00;
                v1b += rho * g * (1.0 - v00);
            }
            return assemble(a, x, b, p, v1, v1b, (b - x) / (b - a));
        }
        if (auto law = power_law_of(spec); law && power_law_cell_ok(spec, a)) {
            const auto [v1, v1b] = power_law_moments(spec, *law, a, x, b);
            return assemble(a, x, b, v0(spec, a, x, b), v1, v1b);
        }
        // OU (closed v0 through erfi), CIR and the logarithmic Bessel case:
        // closed or integral-form v0 with quadrature for the times.
        const MomentProfile prof = moment_profile(spec, a, x, b, 1, quad_panels);
        return assemble(a, x, b, v0(spec, a, x, b), prof.v[1], prof.v_bar[1]);
    }
    const MomentProfile prof = moment_profile(spec, a, x, b, 1, quad_panels);
    return assemble(a, x, b, prof.v[0], prof.v[1], prof.v_bar[1], prof.v_bar[0]);
}

double reflecting_jump(const DiffusionSpec& spec, double boundary, double b, int n_panels) {
    const bool left = boundary == spec.domain.lower && spec.left_boundary.kind == BoundaryKind::reflecting;
    const bool right = boundary == spec.domain.upper && spec.right_boundary.kind == BoundaryKind::reflecting;
    if (!left && !right) throw ContractError("reflecting_jump requires a reflecting endpoint");
    if (left ? !(b > boundary) : !(b < boundary)) throw DomainError("neighbor lies on the wrong side of the boundary");
    return one_sided_jump_time(spec, boundary, b, n_panels);
}

double one_sided_jump_time(const DiffusionSpec& spec, double from, double to, int n_panels) {
    if (from == to) throw DomainError("jump needs distinct endpoints");
    const bool left = from < to;
    CellMesh::Options opt;
    opt.panels = n_panels;
    opt.graded.push_back(from);
    opt.include_lo_atom = left;
    opt.include_hi_atom = !left;
    const CellMesh mesh(spec, std::min(from, to), std::max(from, to), opt);
    double t = 0.0;
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
        const double dist = left ? mesh.w()[i] : mesh.u()[i];
        t += dist * mesh.density()[i] * mesh.weights()[i];
    }
    for (const auto& atom : mesh.atoms()) t += (left ? atom.w : atom.u) * atom.mass;
    return t;
}

double generator_residual(const DiffusionSpec& spec, double a, double x, double b, const RealFn& u,
                          const RealFn& rhs, double h_fd, int samples) {
    (void)x;
    if (!spec.sde) throw ContractError("generator residual needs SDE coefficients");
    if (!(h_fd > 0.0) || !(b - a > 4.0 * h_fd)) throw ParameterError("finite-difference step too large for the cell");
    const auto& mu = spec.sde->drift;
    const auto& sigma = spec.sde->diffusivity;
    double worst = 0.0;
    const double lo = a + 2.0 * h_fd, hi = b - 2.0 * h_fd;
    for (int i = 0; i < samples; ++i) {
        const double z = samples == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (samples - 1.0);
        const double up = u(z + h_fd), mid = u(z), dn = u(z - h_fd);
        const double d1 = (up - dn) / (2.0 * h_fd);
        const double d2 = (up - 2.0 * mid + dn) / (h_fd * h_fd);
        const double s = sigma(z);
        worst = std::max(worst, std::abs(mu(z) * d1 + 0.5 * s * s * d2 - rhs(z)));
    }
    return worst;
}

void write_cell_csv(std::ostream& out, const std::vector<CellQuantities>& cells) {
    out << "a,x,b,v0,v1,v1_bar,p_plus,t_plus,t_minus\n";
    char buf[512];
    for (const auto& c : cells) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", c.a, c.x, c.b,
                      c.v0, c.v1, c.v1_bar, c.p_plus, c.t_plus, c.t_minus);
        out << buf;
    }
}

}  // namespace stmca

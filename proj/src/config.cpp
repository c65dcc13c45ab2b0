#include "stmca/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "stmca/catalog.hpp"
#include "stmca/expression.hpp"

namespace stmca {

using nlohmann::json;

namespace {

class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "$" : path_, "expected an object");
    }

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    bool has(const std::string& key) const { return j_.contains(key); }

    const json* raw(const std::string& key) {
        used_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void number(const std::string& key, double& out) {
        if (const json* v = raw(key)) out = as_number(*v, at(key));
    }
    void extended(const std::string& key, double& out) {
        const json* v = raw(key);
        if (!v) return;
        if (v->is_string()) {
            const std::string s = v->get<std::string>();
            if (s == "inf" || s == "+inf") out = kInf;
            else if (s == "-inf") out = -kInf;
            else throw ConfigError(at(key), "expected a number, \"inf\" or \"-inf\"");
            return;
        }
        out = as_number(*v, at(key));
    }
    void count(const std::string& key, std::size_t& out) {
        if (const json* v = raw(key)) {
            if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0))
                throw ConfigError(at(key), "expected a nonnegative integer");
            out = v->get<std::size_t>();
        }
    }
    void seed(const std::string& key, std::uint64_t& out) {
        if (const json* v = raw(key)) {
            if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0))
                throw ConfigError(at(key), "expected a nonnegative integer");
            out = v->get<std::uint64_t>();
        }
    }
    void integer(const std::string& key, int& out) {
        if (const json* v = raw(key)) {
            if (!v->is_number_integer()) throw ConfigError(at(key), "expected an integer");
            out = v->get<int>();
        }
    }
    void boolean(const std::string& key, bool& out) {
        if (const json* v = raw(key)) {
            if (!v->is_boolean()) throw ConfigError(at(key), "expected true or false");
            out = v->get<bool>();
        }
    }
    void string(const std::string& key, std::string& out) {
        if (const json* v = raw(key)) {
            if (!v->is_string()) throw ConfigError(at(key), "expected a string");
            out = v->get<std::string>();
        }
    }
    void numbers(const std::string& key, std::vector<double>& out) {
        if (const json* v = raw(key)) {
            if (!v->is_array()) throw ConfigError(at(key), "expected a list of numbers");
            out.clear();
            for (std::size_t i = 0; i < v->size(); ++i) out.push_back(as_number((*v)[i], at(key) + "[" + std::to_string(i) + "]"));
        }
    }
    void strings(const std::string& key, std::vector<std::string>& out) {
        if (const json* v = raw(key)) {
            if (!v->is_array()) throw ConfigError(at(key), "expected a list of strings");
            out.clear();
            for (std::size_t i = 0; i < v->size(); ++i) {
                if (!(*v)[i].is_string()) throw ConfigError(at(key) + "[" + std::to_string(i) + "]", "expected a string");
                out.push_back((*v)[i].get<std::string>());
            }
        }
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!used_.count(key)) throw ConfigError(at(key), "unknown field");
        }
    }

    static double as_number(const json& v, const std::string& where) {
        if (!v.is_number()) throw ConfigError(where, "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ConfigError(where, "expected a finite number");
        return d;
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

const std::set<std::string> kGridKinds{"uniform", "tuned", "file", "g0", "g1"};
const std::set<std::string> kBoundaries{"unreachable", "absorbing", "reflecting"};

BoundaryKind boundary_kind(const std::string& s) {
    if (s == "absorbing") return BoundaryKind::absorbing;
    if (s == "reflecting") return BoundaryKind::reflecting;
    return BoundaryKind::unreachable;
}

json extended_json(double v) {
    if (v == kInf) return "inf";
    if (v == -kInf) return "-inf";
    return v;
}

DiffusionBlock parse_diffusion(const json& j) {
    Reader r(j, "diffusion");
    DiffusionBlock d;
    r.string("preset", d.preset);
    if (const json* p = r.raw("params")) {
        if (!p->is_object()) throw ConfigError("diffusion.params", "expected an object");
        for (const auto& [key, value] : p->items()) d.params[key] = Reader::as_number(value, "diffusion.params." + key);
    }
    if (const json* s = r.raw("sde")) {
        Reader q(*s, "diffusion.sde");
        SdeBlock b;
        q.string("drift", b.drift);
        q.string("diffusivity", b.diffusivity);
        q.extended("lower", b.lower);
        q.extended("upper", b.upper);
        q.boolean("lower_closed", b.lower_closed);
        q.boolean("upper_closed", b.upper_closed);
        q.number("anchor", b.anchor);
        q.string("left_boundary", b.left_boundary);
        q.string("right_boundary", b.right_boundary);
        if (const json* atoms = q.raw("atoms")) {
            if (!atoms->is_array()) throw ConfigError("diffusion.sde.atoms", "expected a list");
            for (std::size_t i = 0; i < atoms->size(); ++i) {
                const std::string where = "diffusion.sde.atoms[" + std::to_string(i) + "]";
                Reader a((*atoms)[i], where);
                Atom atom{0.0, 0.0};
                if (!a.has("location") || !a.has("mass")) throw ConfigError(where, "needs location and mass");
                a.number("location", atom.location);
                a.number("mass", atom.mass);
                a.finish();
                if (!(atom.mass > 0.0)) throw ConfigError(where + ".mass", "atom mass must be positive");
                b.atoms.push_back(atom);
            }
        }
        q.finish();
        if (b.drift.empty()) throw ConfigError("diffusion.sde.drift", "missing drift expression");
        if (b.diffusivity.empty()) throw ConfigError("diffusion.sde.diffusivity", "missing diffusivity expression");
        for (const auto& [field, value] : {std::pair{"drift", &b.drift}, std::pair{"diffusivity", &b.diffusivity}}) {
            try {
                Expression::parse(*value);
            } catch (const ParameterError& e) {
                throw ConfigError(std::string("diffusion.sde.") + field, e.what());
            }
        }
        if (!(b.lower < b.upper)) throw ConfigError("diffusion.sde.upper", "domain needs lower < upper");
        if (!kBoundaries.count(b.left_boundary)) throw ConfigError("diffusion.sde.left_boundary", "unknown boundary kind");
        if (!kBoundaries.count(b.right_boundary)) throw ConfigError("diffusion.sde.right_boundary", "unknown boundary kind");
        d.sde = b;
    }
    r.finish();
    if (d.preset.empty() == !d.sde) throw ConfigError("diffusion", "exactly one of preset or sde is required");
    if (!d.preset.empty()) {
        const auto names = catalog::preset_names();
        if (std::find(names.begin(), names.end(), d.preset) == names.end())
            throw ConfigError("diffusion.preset", "unknown preset '" + d.preset + "'");
        const auto defaults = catalog::preset_parameters(d.preset);
        for (const auto& [key, value] : d.params) {
            if (!defaults.count(key)) throw ConfigError("diffusion.params." + key, "unknown parameter");
        }
    } else if (!d.params.empty()) {
        throw ConfigError("diffusion.params", "params apply to presets only");
    }
    return d;
}

GridBlock parse_grid(const json& j) {
    Reader r(j, "grid");
    GridBlock g;
    r.string("kind", g.kind);
    r.number("h", g.h);
    std::vector<double> window{g.window_lo, g.window_hi};
    r.numbers("window", window);
    r.number("anchor", g.anchor);
    r.string("path", g.path);
    r.finish();
    if (!kGridKinds.count(g.kind)) throw ConfigError("grid.kind", "unknown grid kind '" + g.kind + "'");
    if (!(g.h > 0.0)) throw ConfigError("grid.h", "h must be positive");
    if (window.size() != 2 || !(window[0] < window[1])) throw ConfigError("grid.window", "expected [lo, hi] with lo < hi");
    g.window_lo = window[0];
    g.window_hi = window[1];
    if (g.kind == "file" && g.path.empty()) throw ConfigError("grid.path", "file grids need a path");
    return g;
}

RunBlock parse_run(const json& j) {
    Reader r(j, "run");
    RunBlock b;
    r.number("x0", b.x0);
    r.numbers("horizons", b.horizons);
    r.count("n_paths", b.n_paths);
    r.seed("master_seed", b.master_seed);
    r.string("method", b.method);
    r.integer("quad_panels", b.quad_panels);
    r.count("dump_paths", b.dump_paths);
    r.integer("histogram_bins", b.histogram_bins);
    r.finish();
    if (b.horizons.empty()) throw ConfigError("run.horizons", "at least one horizon is required");
    for (std::size_t i = 0; i < b.horizons.size(); ++i) {
        if (!(b.horizons[i] > 0.0)) throw ConfigError("run.horizons[" + std::to_string(i) + "]", "horizons must be positive");
    }
    if (b.n_paths < 1) throw ConfigError("run.n_paths", "n_paths must be at least 1");
    if (b.method != "quadrature" && b.method != "closed_form") throw ConfigError("run.method", "expected quadrature or closed_form");
    if (b.quad_panels < 8) throw ConfigError("run.quad_panels", "at least 8 panels are required");
    if (b.histogram_bins < 1) throw ConfigError("run.histogram_bins", "at least one bin is required");
    return b;
}

OutputBlock parse_output(const json& j) {
    Reader r(j, "output");
    OutputBlock o;
    r.string("directory", o.directory);
    r.finish();
    if (o.directory.empty()) throw ConfigError("output.directory", "directory must not be empty");
    return o;
}

EstimatorBlock parse_estimator(const json& j) {
    Reader r(j, "estimator");
    EstimatorBlock e;
    r.numbers("alphas", e.alphas);
    r.count("n", e.n);
    r.count("n_mc", e.n_mc);
    r.number("t", e.t);
    r.number("g_lo", e.g_lo);
    r.number("g_hi", e.g_hi);
    r.number("g_height", e.g_height);
    r.finish();
    if (e.alphas.empty()) throw ConfigError("estimator.alphas", "at least one alpha is required");
    for (std::size_t i = 0; i < e.alphas.size(); ++i) {
        if (!(e.alphas[i] > 0.0 && e.alphas[i] < 1.0))
            throw ConfigError("estimator.alphas[" + std::to_string(i) + "]", "alpha must lie in (0, 1)");
    }
    if (e.n < 1) throw ConfigError("estimator.n", "n must be at least 1");
    if (e.n_mc < 1) throw ConfigError("estimator.n_mc", "n_mc must be at least 1");
    if (!(e.t > 0.0)) throw ConfigError("estimator.t", "t must be positive");
    if (!(e.g_lo > 0.0 && e.g_hi > e.g_lo)) throw ConfigError("estimator.g_hi", "test function needs 0 < g_lo < g_hi");
    if (!(e.g_height > 0.0)) throw ConfigError("estimator.g_height", "height must be positive");
    return e;
}

ConvergenceBlock parse_convergence(const json& j) {
    Reader r(j, "convergence");
    ConvergenceBlock c;
    r.numbers("h_list", c.h_list);
    r.numbers("p_list", c.p_list);
    r.strings("grid_kinds", c.grid_kinds);
    r.number("t", c.t);
    r.count("n_paths", c.n_paths);
    r.string("reference", c.reference);
    r.number("fine_h", c.fine_h);
    if (const json* pts = r.raw("points")) {
        if (!pts->is_array()) throw ConfigError("convergence.points", "expected a list of [metric, error] pairs");
        for (std::size_t i = 0; i < pts->size(); ++i) {
            const std::string where = "convergence.points[" + std::to_string(i) + "]";
            const json& p = (*pts)[i];
            if (!p.is_array() || p.size() != 2) throw ConfigError(where, "expected [metric, error]");
            c.points.emplace_back(Reader::as_number(p[0], where + "[0]"), Reader::as_number(p[1], where + "[1]"));
        }
    }
    r.finish();
    if (c.points.empty()) {
        if (c.h_list.size() < 3) throw ConfigError("convergence.h_list", "at least three grid sizes are required");
        for (std::size_t i = 0; i < c.h_list.size(); ++i) {
            if (!(c.h_list[i] > 0.0)) throw ConfigError("convergence.h_list[" + std::to_string(i) + "]", "h must be positive");
        }
    } else if (c.points.size() < 3) {
        throw ConfigError("convergence.points", "at least three points are required");
    }
    if (c.p_list.empty()) throw ConfigError("convergence.p_list", "at least one p is required");
    for (std::size_t i = 0; i < c.p_list.size(); ++i) {
        if (!(c.p_list[i] >= 1.0)) throw ConfigError("convergence.p_list[" + std::to_string(i) + "]", "p must be at least 1");
    }
    if (c.grid_kinds.empty()) throw ConfigError("convergence.grid_kinds", "at least one grid kind is required");
    for (std::size_t i = 0; i < c.grid_kinds.size(); ++i) {
        if (!kGridKinds.count(c.grid_kinds[i]) || c.grid_kinds[i] == "file")
            throw ConfigError("convergence.grid_kinds[" + std::to_string(i) + "]", "unsupported grid kind");
    }
    if (!(c.t > 0.0)) throw ConfigError("convergence.t", "t must be positive");
    if (c.n_paths < 1) throw ConfigError("convergence.n_paths", "n_paths must be at least 1");
    if (c.reference != "kernel" && c.reference != "fine") throw ConfigError("convergence.reference", "expected kernel or fine");
    if (c.reference == "fine" && !(c.fine_h > 0.0)) throw ConfigError("convergence.fine_h", "a fine reference needs fine_h > 0");
    return c;
}

}  // namespace

RunConfig parse_config(const json& j) {
    Reader r(j, "");
    RunConfig c;
    const json* d = r.raw("diffusion");
    if (!d) throw ConfigError("diffusion", "missing diffusion block");
    c.diffusion = parse_diffusion(*d);
    if (const json* g = r.raw("grid")) c.grid = parse_grid(*g);
    if (const json* b = r.raw("run")) c.run = parse_run(*b);
    if (const json* o = r.raw("output")) c.output = parse_output(*o);
    if (const json* e = r.raw("estimator")) c.estimator = parse_estimator(*e);
    if (const json* v = r.raw("convergence")) c.convergence = parse_convergence(*v);
    r.finish();
    if (!(c.run.x0 >= c.grid.window_lo && c.run.x0 <= c.grid.window_hi))
        throw ConfigError("run.x0", "x0 must lie inside the grid window");
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("$", "cannot open config file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("$", std::string("malformed JSON: ") + e.what());
    }
    return parse_config(j);
}

json to_json(const RunConfig& c) {
    json j;
    json d = json::object();
    if (!c.diffusion.preset.empty()) {
        d["preset"] = c.diffusion.preset;
        d["params"] = json::object();
        for (const auto& [k, v] : c.diffusion.params) d["params"][k] = v;
    }
    if (c.diffusion.sde) {
        const SdeBlock& s = *c.diffusion.sde;
        json a = json::array();
        for (const Atom& atom : s.atoms) a.push_back({{"location", atom.location}, {"mass", atom.mass}});
        d["sde"] = {{"drift", s.drift},
                    {"diffusivity", s.diffusivity},
                    {"lower", extended_json(s.lower)},
                    {"upper", extended_json(s.upper)},
                    {"lower_closed", s.lower_closed},
                    {"upper_closed", s.upper_closed},
                    {"anchor", s.anchor},
                    {"atoms", a},
                    {"left_boundary", s.left_boundary},
                    {"right_boundary", s.right_boundary}};
    }
    j["diffusion"] = d;
    j["grid"] = {{"kind", c.grid.kind},
                 {"h", c.grid.h},
                 {"window", {c.grid.window_lo, c.grid.window_hi}},
                 {"anchor", c.grid.anchor},
                 {"path", c.grid.path}};
    j["run"] = {{"x0", c.run.x0},
                {"horizons", c.run.horizons},
                {"n_paths", c.run.n_paths},
                {"master_seed", c.run.master_seed},
                {"method", c.run.method},
                {"quad_panels", c.run.quad_panels},
                {"dump_paths", c.run.dump_paths},
                {"histogram_bins", c.run.histogram_bins}};
    j["output"] = {{"directory", c.output.directory}};
    if (c.estimator) {
        const auto& e = *c.estimator;
        j["estimator"] = {{"alphas", e.alphas}, {"n", e.n},       {"n_mc", e.n_mc},
                          {"t", e.t},           {"g_lo", e.g_lo}, {"g_hi", e.g_hi}, {"g_height", e.g_height}};
    }
    if (c.convergence) {
        const auto& v = *c.convergence;
        json pts = json::array();
        for (const auto& [m, e] : v.points) pts.push_back({m, e});
        j["convergence"] = {{"h_list", v.h_list}, {"p_list", v.p_list},     {"grid_kinds", v.grid_kinds},
                            {"t", v.t},           {"n_paths", v.n_paths},   {"reference", v.reference},
                            {"fine_h", v.fine_h}, {"points", pts}};
    }
    return j;
}

Method parse_method(const std::string& name) {
    if (name == "closed_form") return Method::closed_form;
    if (name == "quadrature") return Method::quadrature;
    throw ConfigError("run.method", "expected quadrature or closed_form");
}

DiffusionSpec build_diffusion(const DiffusionBlock& block) {
    if (!block.preset.empty()) {
        try {
            return catalog::make_preset(block.preset, block.params);
        } catch (const ParameterError& e) {
            throw ConfigError("diffusion.params", e.what());
        }
    }
    const SdeBlock& s = *block.sde;
    const Expression drift = Expression::parse(s.drift);
    const Expression diff = Expression::parse(s.diffusivity);
    Interval domain;
    try {
        domain = Interval(s.lower, s.upper, s.lower_closed, s.upper_closed);
    } catch (const Error& e) {
        throw ConfigError("diffusion.sde.lower", e.what());
    }
    DiffusionSpec spec;
    try {
        spec = from_sde(drift, diff, domain, s.anchor);
    } catch (const ParameterError& e) {
        throw ConfigError("diffusion.sde", e.what());
    }
    if (!s.atoms.empty()) {
        const SpeedMeasure base = spec.speed;
        spec.speed = SpeedMeasure([base](double x) { return base.density(x); }, s.atoms,
                                  [base](double x) { return base.log_density(x); });
        for (const Atom& a : s.atoms) spec.breakpoints.push_back(a.location);
    }
    spec.left_boundary.kind = boundary_kind(s.left_boundary);
    spec.right_boundary.kind = boundary_kind(s.right_boundary);
    try {
        spec.validate();
    } catch (const ParameterError& e) {
        throw ConfigError("diffusion.sde", e.what());
    }
    return spec;
}

Grid build_grid(const RunConfig& config, const DiffusionSpec& spec, const std::string& kind, double h) {
    const GridBlock& g = config.grid;
    const Interval window(g.window_lo, g.window_hi, true, true);
    const bool sticky = spec.catalog_id == "sticky_bm";
    auto rho = [&]() { return spec.speed.atoms().at(0).mass; };
    try {
        if (kind == "uniform") return uniform_grid(spec.domain, h, window, g.anchor);
        if (kind == "tuned") {
            if (sticky) return tuned_grid_sticky(h, rho(), window);
            return tuned_grid_sde(spec, h, config.run.x0, window);
        }
        if (kind == "g0" || kind == "g1") {
            if (!sticky) throw ConfigError("grid.kind", "g0 and g1 grids are defined for the sticky_bm preset");
            return kind == "g0" ? sticky_grid_g0(h, rho(), window) : sticky_grid_g1(h, rho(), window);
        }
        std::ifstream in(g.path);
        if (!in) throw ConfigError("grid.path", "cannot open grid file '" + g.path + "'");
        return read_grid_csv(in, spec.domain);
    } catch (const ParameterError& e) {
        throw ConfigError("grid", e.what());
    } catch (const DomainError& e) {
        throw ConfigError("grid", e.what());
    }
}

}  // namespace stmca

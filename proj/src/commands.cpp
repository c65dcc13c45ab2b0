#include "stmca/commands.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "stmca/analysis.hpp"
#include "stmca/estimators.hpp"
#include "stmca/walk.hpp"

namespace stmca {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

class OutputDir {
public:
    OutputDir(const RunConfig& config, const CommandOptions& options, std::string command)
        : command_(std::move(command)),
          seed_(options.seed.value_or(config.run.master_seed)),
          threads_(options.threads),
          start_(std::chrono::steady_clock::now()) {
        dir_ = options.out_dir.value_or(config.output.directory);
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec || !fs::is_directory(dir_)) throw ConfigError("output.directory", "cannot create '" + dir_.string() + "'");
    }

    std::uint64_t seed() const { return seed_; }

    void csv(const std::string& name, const std::string& body) {
        char head[256];
        std::snprintf(head, sizeof head, "# stmca %s master_seed=%llu threads=%d created=%s wall_clock_s=%.3f\n",
                      command_.c_str(), static_cast<unsigned long long>(seed_), threads_, utc_now().c_str(), elapsed());
        write(name, head + body);
    }

    void json_file(const std::string& name, const json& payload) {
        json header{{"command", command_},
                    {"master_seed", seed_},
                    {"threads", threads_},
                    {"created", utc_now()},
                    {"wall_clock_s", elapsed()}};
        const std::string body = payload.dump(2);
        write(name, "{\"header\":" + header.dump() + "," + body.substr(1) + "\n");
    }

    CommandResult result() const { return {files_}; }

private:
    std::string command_;
    std::uint64_t seed_;
    int threads_;
    std::chrono::steady_clock::time_point start_;
    fs::path dir_;
    std::vector<std::string> files_;

    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }
    void write(const std::string& name, const std::string& text) {
        const fs::path p = dir_ / name;
        std::ofstream out(p, std::ios::binary);
        out << text;
        if (!out) throw ConfigError("output.directory", "cannot write '" + p.string() + "'");
        files_.push_back(p.string());
    }
};

json grid_json(const std::string& kind, double h, const Grid& grid, const GridMetrics& m) {
    return {{"kind", kind},
            {"h", h},
            {"n_points", grid.size()},
            {"lo", grid.points().front()},
            {"hi", grid.points().back()},
            {"max_cell", m.max_cell},
            {"x_norm", m.x_norm},
            {"x_norm_over_h2", m.x_norm / (h * h)}};
}

std::optional<ReferenceKernel> reference_for(const DiffusionSpec& spec, double x0, double t) {
    if (spec.catalog_id.empty()) return std::nullopt;
    try {
        return reference_kernel(spec.catalog_id, spec.params, x0, t);
    } catch (const UnsupportedError&) {
        return std::nullopt;
    } catch (const DomainError&) {
        return std::nullopt;
    }
}

struct Setup {
    DiffusionSpec spec;
    Grid grid;
    TransitionTable table;
};

Setup prepare(const RunConfig& config, const std::string& kind, double h, int threads) {
    DiffusionSpec spec = build_diffusion(config.diffusion);
    Grid grid = build_grid(config, spec, kind, h);
    TableOptions topt;
    topt.method = parse_method(config.run.method);
    topt.quad_panels = config.run.quad_panels;
    topt.threads = threads;
    TransitionTable table = build_table(spec, grid, topt);
    return {std::move(spec), std::move(grid), std::move(table)};
}

std::vector<double> kept_values(const TerminalBatch& batch, std::size_t h) {
    std::vector<double> v;
    for (std::size_t p = 0; p < batch.truncated.size(); ++p) {
        if (!batch.truncated[p]) v.push_back(batch.values[h][p]);
    }
    return v;
}

}  // namespace

std::vector<std::string> command_names() { return {"simulate", "grid", "moments-dump", "estimate", "convergence"}; }

CommandResult cmd_simulate(const RunConfig& config, const CommandOptions& options) {
    OutputDir out(config, options, "simulate");
    const Setup s = prepare(config, config.grid.kind, config.grid.h, options.threads);
    const RunBlock& run = config.run;
    const TerminalBatch batch =
        simulate_terminal(s.spec, s.grid, s.table, run.x0, run.horizons, run.n_paths, out.seed(), options.threads);

    std::ostringstream csv;
    csv << "path,truncated,absorbed";
    for (double t : batch.horizons) csv << ",t=" << fmt(t);
    csv << "\n";
    for (std::size_t p = 0; p < run.n_paths; ++p) {
        csv << p << "," << int(batch.truncated[p]) << "," << int(batch.absorbed[p]);
        for (std::size_t h = 0; h < batch.horizons.size(); ++h) csv << "," << fmt(batch.values[h][p]);
        csv << "\n";
    }
    out.csv("terminal_values.csv", csv.str());

    json horizons = json::array();
    for (std::size_t h = 0; h < batch.horizons.size(); ++h) {
        const double t = batch.horizons[h];
        const EmpiricalLaw all(batch.values[h], t);
        json entry{{"t", t}, {"mean", all.mean()}, {"variance", all.variance()}, {"n", all.size()}};
        const auto kept = kept_values(batch, h);
        const auto ref = reference_for(s.spec, run.x0, t);
        if (!kept.empty()) {
            const EmpiricalLaw law(kept, t);
            entry["mean_untruncated"] = law.mean();
            entry["variance_untruncated"] = law.variance();
            if (ref) {
                entry["reference_mean"] = ref->mean();
                entry["w1_to_reference"] = wasserstein_to_reference(law, *ref, 1.0);
            }
        }
        std::ostringstream hist;
        const double lo = s.grid.points().front(), hi = s.grid.points().back();
        write_histogram_csv(hist, all, run.histogram_bins, lo, hi, ref ? &*ref : nullptr);
        out.csv("histogram_t=" + fmt(t) + ".csv", hist.str());
        horizons.push_back(entry);
    }
    for (std::size_t p = 0; p < std::min(run.dump_paths, run.n_paths); ++p) {
        const PathRecord path = simulate(s.spec, s.grid, s.table, run.x0, batch.horizons.back(), RngSpec{out.seed(), p});
        std::ostringstream ps;
        write_path_csv(ps, path);
        char name[48];
        std::snprintf(name, sizeof name, "path_%06zu.csv", p);
        out.csv(name, ps.str());
    }
    json summary{{"config", to_json(config)},
                 {"master_seed", out.seed()},
                 {"grid", grid_json(config.grid.kind, config.grid.h, s.grid, metrics(s.spec, s.grid))},
                 {"n_paths", run.n_paths},
                 {"horizons", horizons},
                 {"truncated_count", batch.truncated_count()},
                 {"absorbed_count", batch.absorbed_count()},
                 {"total_steps", batch.total_steps}};
    out.json_file("summary.json", summary);
    return out.result();
}

CommandResult cmd_grid(const RunConfig& config, const CommandOptions& options) {
    OutputDir out(config, options, "grid");
    const DiffusionSpec spec = build_diffusion(config.diffusion);
    const Grid grid = build_grid(config, spec, config.grid.kind, config.grid.h);
    std::ostringstream csv;
    write_grid_csv(csv, grid);
    out.csv("grid.csv", csv.str());
    out.json_file("grid_metrics.json", grid_json(config.grid.kind, config.grid.h, grid, metrics(spec, grid)));
    return out.result();
}

CommandResult cmd_moments_dump(const RunConfig& config, const CommandOptions& options) {
    OutputDir out(config, options, "moments-dump");
    const DiffusionSpec spec = build_diffusion(config.diffusion);
    const Grid grid = build_grid(config, spec, config.grid.kind, config.grid.h);
    const Method method = parse_method(config.run.method);
    std::vector<CellQuantities> cells(grid.size() - 2);
    parallel_for(cells.size(), options.threads, [&](std::size_t i) {
        const Cell c = grid.cell(i + 1);
        cells[i] = cell_quantities(spec, c.a, c.center, c.b, method, config.run.quad_panels);
    });
    std::ostringstream csv;
    write_cell_csv(csv, cells);
    out.csv("cells.csv", csv.str());
    return out.result();
}

CommandResult cmd_estimate(const RunConfig& config, const CommandOptions& options) {
    if (!config.estimator) throw ConfigError("estimator", "the estimate command needs an estimator block");
    OutputDir out(config, options, "estimate");
    const Setup s = prepare(config, config.grid.kind, config.grid.h, options.threads);
    if (s.spec.speed.atoms().size() != 1) throw ConfigError("diffusion", "estimation needs exactly one atom");
    const EstimatorBlock& e = *config.estimator;
    StickinessExperiment setup;
    setup.alphas = e.alphas;
    setup.n = e.n;
    setup.t = e.t;
    setup.n_mc = e.n_mc;
    setup.atom = s.spec.speed.atoms()[0].location;
    setup.g = indicator_test_function(e.g_lo, e.g_hi, e.g_height);
    setup.x0 = config.run.x0;
    setup.master_seed = out.seed();
    setup.threads = options.threads;
    const auto reports = run_stickiness_experiment(s.spec, s.grid, s.table, setup);
    std::ostringstream csv;
    csv << report_csv_header() << "\n";
    json rows = json::array();
    for (std::size_t a = 0; a < reports.size(); ++a) {
        csv << report_csv_row(e.alphas[a], e.n, reports[a]) << "\n";
        rows.push_back(report_json(e.alphas[a], e.n, reports[a]));
    }
    out.csv("estimates.csv", csv.str());
    out.json_file("estimates.json", {{"config", to_json(config)},
                                     {"master_seed", out.seed()},
                                     {"test_function", setup.g.support_note},
                                     {"rows", rows}});
    return out.result();
}

CommandResult cmd_convergence(const RunConfig& config, const CommandOptions& options) {
    if (!config.convergence) throw ConfigError("convergence", "the convergence command needs a convergence block");
    OutputDir out(config, options, "convergence");
    const ConvergenceBlock& c = *config.convergence;
    json result{{"config", to_json(config)},
                {"master_seed", out.seed()},
                {"distance", "Wasserstein distance between fixed-time marginal laws"}};
    if (!c.points.empty()) {
        std::vector<RatePoint> pts;
        for (const auto& [m, e] : c.points) pts.push_back({m, e});
        result["fit"] = rate_fit_json(rate_fit(pts));
        out.json_file("convergence.json", result);
        return out.result();
    }
    const DiffusionSpec spec = build_diffusion(config.diffusion);
    const double x0 = config.run.x0;
    std::optional<ReferenceKernel> kernel;
    if (c.reference == "kernel") {
        kernel = reference_for(spec, x0, c.t);
        if (!kernel) throw ConfigError("convergence.reference", "no reference kernel for this diffusion; use \"fine\"");
    }
    json kinds = json::object();
    for (const std::string& kind : c.grid_kinds) {
        std::optional<EmpiricalLaw> fine;
        if (c.reference == "fine") {
            const Setup f = prepare(config, kind, c.fine_h, options.threads);
            const auto b = simulate_terminal(f.spec, f.grid, f.table, x0, {c.t}, c.n_paths, out.seed() ^ 0x5bd1e995ULL,
                                             options.threads);
            fine.emplace(kept_values(b, 0), c.t);
        }
        json points = json::array();
        std::vector<std::vector<RatePoint>> by_norm(c.p_list.size()), by_cell(c.p_list.size());
        for (double h : c.h_list) {
            const Setup s = prepare(config, kind, h, options.threads);
            const GridMetrics m = metrics(s.spec, s.grid);
            const auto b = simulate_terminal(s.spec, s.grid, s.table, x0, {c.t}, c.n_paths, out.seed(), options.threads);
            const auto kept = kept_values(b, 0);
            if (kept.empty()) throw RunawayError("every path was truncated at h = " + fmt(h));
            const EmpiricalLaw law(kept, c.t);
            json errors = json::object();
            for (std::size_t i = 0; i < c.p_list.size(); ++i) {
                const double p = c.p_list[i];
                const double w = kernel ? wasserstein_to_reference(law, *kernel, p) : wasserstein_1d(law, *fine, p);
                errors["p=" + fmt(p)] = w;
                by_norm[i].push_back({m.x_norm, w});
                by_cell[i].push_back({m.max_cell, w});
            }
            points.push_back({{"h", h},
                              {"max_cell", m.max_cell},
                              {"x_norm", m.x_norm},
                              {"n_used", kept.size()},
                              {"truncated", b.truncated_count()},
                              {"errors", errors}});
        }
        json fits = json::object();
        for (std::size_t i = 0; i < c.p_list.size(); ++i) {
            fits["p=" + fmt(c.p_list[i])] = {{"vs_x_norm", rate_fit_json(rate_fit(by_norm[i]))},
                                             {"vs_max_cell", rate_fit_json(rate_fit(by_cell[i]))}};
        }
        kinds[kind] = {{"points", points}, {"fits", fits}};
    }
    result["grids"] = kinds;
    out.json_file("convergence.json", result);
    return out.result();
}

CommandResult run_command(const std::string& name, const RunConfig& config, const CommandOptions& options) {
    if (name == "simulate") return cmd_simulate(config, options);
    if (name == "grid") return cmd_grid(config, options);
    if (name == "moments-dump") return cmd_moments_dump(config, options);
    if (name == "estimate") return cmd_estimate(config, options);
    if (name == "convergence") return cmd_convergence(config, options);
    throw ConfigError("command", "unknown command '" + name + "'");
}

std::string read_payload(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("output.directory", "cannot read '" + path + "'");
    std::string first;
    std::getline(in, first);
    std::ostringstream rest;
    rest << in.rdbuf();
    if (!first.empty() && first[0] == '{') {
        // {"header":{...},<rest of the first line>
        const auto close = first.find("},");
        if (close == std::string::npos) return first + "\n" + rest.str();
        return "{" + first.substr(close + 2) + "\n" + rest.str();
    }
    return rest.str();
}

}  // namespace stmca

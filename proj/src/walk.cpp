#include "stmca/walk.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

namespace stmca {

namespace {

std::string at_index(const char* what, std::size_t j) { return std::string(what) + " at grid index " + std::to_string(j); }

TransitionRow boundary_row(const DiffusionSpec& spec, const Grid& grid, std::size_t j, int panels) {
    const auto& p = grid.points();
    const bool left = j == 0;
    const std::size_t k = left ? 1 : j - 1;
    TransitionRow row;
    row.p_plus = left ? 1.0 : 0.0;
    BoundaryKind kind = BoundaryKind::unreachable;
    if (grid.is_domain_endpoint(j)) kind = left ? spec.left_boundary.kind : spec.right_boundary.kind;
    switch (kind) {
        case BoundaryKind::absorbing:
            row.kind = RowKind::absorbing;
            return row;
        case BoundaryKind::reflecting:
            row.kind = RowKind::reflecting;
            break;
        case BoundaryKind::unreachable:
            row.kind = RowKind::edge;
            break;
    }
    const double t = one_sided_jump_time(spec, p[j], p[k], panels);
    (left ? row.t_plus : row.t_minus) = t;
    return row;
}

}  // namespace

TransitionTable build_table(const DiffusionSpec& spec, const Grid& grid, const TableOptions& options) {
    if (options.method == Method::closed_form && !has_closed_form(spec))
        throw UnsupportedError("closed-form transition table requested for a non-catalog diffusion");
    const auto& p = grid.points();
    TransitionTable table;
    table.points = p;
    table.rows.resize(p.size());
    const int panels = std::max(8, options.quad_panels);
    parallel_for(p.size(), options.threads, [&](std::size_t j) {
        try {
            if (j == 0 || j + 1 == p.size()) {
                table.rows[j] = boundary_row(spec, grid, j, panels);
                return;
            }
            const CellQuantities c = cell_quantities(spec, p[j - 1], p[j], p[j + 1], options.method, panels);
            TransitionRow row;
            row.kind = RowKind::interior;
            row.p_plus = c.p_plus;
            row.t_plus = c.t_plus;
            row.t_minus = c.t_minus;
            row.one_sided_plus = c.one_sided_plus;
            row.one_sided_minus = c.one_sided_minus;
            table.rows[j] = row;
        } catch (const QuadratureError& e) {
            throw QuadratureError(at_index(e.what(), j), e.abscissa());
        } catch (const DomainError& e) {
            throw DomainError(at_index(e.what(), j));
        }
    });
    return table;
}

std::size_t init_state(const DiffusionSpec& spec, const Grid& grid, double x0, RandomStream& rng) {
    const Location loc = locate(grid, x0);
    const auto& p = grid.points();
    if (p[loc.index] == x0) return loc.index;
    const std::size_t lower = x0 > p[loc.index] ? loc.index : loc.index - 1;
    const double prob = v0(spec, p[lower], x0, p[lower + 1]);
    return rng.uniform() < prob ? lower + 1 : lower;
}

PathRecord simulate(const DiffusionSpec& spec, const Grid& grid, const TransitionTable& table, double x0,
                    double horizon, const RngSpec& rng, std::uint64_t max_steps) {
    if (!(horizon > 0.0)) throw ParameterError("simulation horizon must be positive");
    RandomStream stream(rng);
    const std::size_t start = init_state(spec, grid, x0, stream);
    PathRecord path;
    path.horizon = horizon;
    path.times.push_back(0.0);
    path.values.push_back(table.points[start]);
    const auto outcome = run_walk(
        table, start, horizon, stream,
        [&](double t, std::size_t j) {
            path.times.push_back(t);
            path.values.push_back(table.points[j]);
        },
        max_steps);
    path.truncated = outcome.truncated;
    path.absorbed = outcome.absorbed;
    return path;
}

double value_at(const PathRecord& path, double t) {
    const double last = std::max(path.horizon, path.times.back());
    if (!(t >= 0.0 && t <= last)) throw DomainError("path evaluated outside its recorded range");
    auto it = std::upper_bound(path.times.begin(), path.times.end(), t);
    return path.values[static_cast<std::size_t>(it - path.times.begin()) - 1];
}

std::size_t TerminalBatch::truncated_count() const {
    return static_cast<std::size_t>(std::count(truncated.begin(), truncated.end(), 1));
}

std::size_t TerminalBatch::absorbed_count() const {
    return static_cast<std::size_t>(std::count(absorbed.begin(), absorbed.end(), 1));
}

TerminalBatch simulate_terminal(const DiffusionSpec& spec, const Grid& grid, const TransitionTable& table, double x0,
                                std::vector<double> horizons, std::size_t n_paths, std::uint64_t master_seed,
                                int threads, std::uint64_t max_steps) {
    if (horizons.empty()) throw ParameterError("at least one horizon is required");
    std::sort(horizons.begin(), horizons.end());
    if (!(horizons.front() > 0.0)) throw ParameterError("horizons must be positive");
    TerminalBatch batch;
    batch.horizons = horizons;
    batch.values.assign(horizons.size(), std::vector<double>(n_paths));
    batch.truncated.assign(n_paths, 0);
    batch.absorbed.assign(n_paths, 0);
    std::vector<std::uint64_t> steps(n_paths, 0);
    const double t_max = horizons.back();
    parallel_for(n_paths, threads, [&](std::size_t path) {
        RandomStream stream(RngSpec{master_seed, path});
        std::size_t current = init_state(spec, grid, x0, stream);
        std::size_t next_h = 0;
        const auto outcome = run_walk(
            table, current, t_max, stream,
            [&](double t, std::size_t j) {
                while (next_h < horizons.size() && horizons[next_h] < t) {
                    batch.values[next_h][path] = table.points[current];
                    ++next_h;
                }
                current = j;
            },
            max_steps);
        for (; next_h < horizons.size(); ++next_h) batch.values[next_h][path] = table.points[outcome.final_index];
        batch.truncated[path] = outcome.truncated ? 1 : 0;
        batch.absorbed[path] = outcome.absorbed ? 1 : 0;
        steps[path] = outcome.steps;
    });
    for (auto s : steps) batch.total_steps += s;
    return batch;
}

namespace {

struct ExitSample {
    bool up;
    double time;
};

// Fine-step Brownian motion from x until it leaves (a, b).
ExitSample exit_cell(double a, double x, double b, double dt, RandomStream& rng) {
    const double sd = std::sqrt(dt);
    double w = x;
    double t = 0.0;
    while (true) {
        const double next = w + sd * rng.normal();
        t += dt;
        if (next >= b) return {true, t - dt * (next - b) / (next - w)};
        if (next <= a) return {false, t - dt * (a - next) / (w - next)};
        const double p_up = std::exp(-2.0 * (b - w) * (b - next) / dt);
        const double p_dn = std::exp(-2.0 * (w - a) * (next - a) / dt);
        const double u = rng.uniform();
        if (u < p_up) return {true, t - 0.5 * dt};
        if (u < p_up + p_dn) return {false, t - 0.5 * dt};
        w = next;
    }
}

EmbedPoint summarize(std::size_t j, double x, std::size_t n, std::size_t ups, double time_sum) {
    EmbedPoint e;
    e.index = j;
    e.x = x;
    e.crossings = n;
    e.p_hat = n ? static_cast<double>(ups) / static_cast<double>(n) : 0.0;
    e.standard_error = n ? std::sqrt(std::max(e.p_hat * (1.0 - e.p_hat), 1e-300) / static_cast<double>(n)) : 0.0;
    e.mean_time = n ? time_sum / static_cast<double>(n) : 0.0;
    return e;
}

}  // namespace

std::vector<EmbedPoint> embed_oracle_bm(const Grid& grid, double x0, std::size_t n_paths, double dt_fine,
                                        const RngSpec& rng, EmbedMode mode, int threads) {
    if (!(dt_fine > 0.0)) throw ParameterError("fine time step must be positive");
    const auto& p = grid.points();
    const std::size_t interior = p.size() - 2;
    std::vector<EmbedPoint> out(interior);
    if (mode == EmbedMode::restart) {
        parallel_for(interior, threads, [&](std::size_t i) {
            const std::size_t j = i + 1;
            RandomStream stream(RngSpec{rng.master_seed, rng.stream_id * 0x9E3779B97F4A7C15ULL + j});
            std::size_t ups = 0;
            double time_sum = 0.0;
            for (std::size_t n = 0; n < n_paths; ++n) {
                const ExitSample s = exit_cell(p[j - 1], p[j], p[j + 1], dt_fine, stream);
                ups += s.up ? 1 : 0;
                time_sum += s.time;
            }
            out[i] = summarize(j, p[j], n_paths, ups, time_sum);
        });
        return out;
    }
    // One long path from x0; n_paths counts recorded transitions.
    RandomStream stream(rng);
    std::vector<std::size_t> count(p.size(), 0), ups(p.size(), 0);
    std::vector<double> time_sum(p.size(), 0.0);
    auto start_index = [&]() -> std::size_t {
        const Location loc = locate(grid, x0);
        if (p[loc.index] == x0 && loc.interior) return loc.index;
        const std::size_t lower = x0 > p[loc.index] ? loc.index : loc.index - 1;
        const ExitSample s = exit_cell(p[lower], x0, p[lower + 1], dt_fine, stream);
        return s.up ? lower + 1 : lower;
    };
    std::size_t j = start_index();
    for (std::size_t n = 0; n < n_paths; ++n) {
        if (j == 0 || j + 1 == p.size()) j = start_index();
        if (j == 0 || j + 1 == p.size()) continue;
        const ExitSample s = exit_cell(p[j - 1], p[j], p[j + 1], dt_fine, stream);
        ++count[j];
        ups[j] += s.up ? 1 : 0;
        time_sum[j] += s.time;
        j = s.up ? j + 1 : j - 1;
    }
    for (std::size_t i = 0; i < interior; ++i) out[i] = summarize(i + 1, p[i + 1], count[i + 1], ups[i + 1], time_sum[i + 1]);
    return out;
}

void write_path_csv(std::ostream& out, const PathRecord& path) {
    out << "step,time,value\n";
    char buf[96];
    for (std::size_t i = 0; i < path.times.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", i, path.times[i], path.values[i]);
        out << buf;
    }
}

}  // namespace stmca

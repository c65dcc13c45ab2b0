#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "stmca/grid.hpp"
#include "stmca/measure.hpp"
#include "stmca/moments.hpp"
#include "stmca/rng.hpp"

namespace stmca {

enum class RowKind { interior, reflecting, absorbing, edge };

// Row of the chain at one grid index. Boundary-like rows are encoded with
// p_plus = 1 (jump right after t_plus) or p_plus = 0 (jump left after t_minus).
struct TransitionRow {
    RowKind kind = RowKind::interior;
    double p_plus = 0.0;
    double t_plus = 0.0;
    double t_minus = 0.0;
    bool one_sided_plus = false;
    bool one_sided_minus = false;
};

struct TransitionTable {
    std::vector<double> points;
    std::vector<TransitionRow> rows;
    std::size_t size() const { return rows.size(); }
};

struct TableOptions {
    Method method = Method::quadrature;
    int quad_panels = 16;
    int threads = 1;
};

TransitionTable build_table(const DiffusionSpec& spec, const Grid& grid, const TableOptions& options = {});

struct PathRecord {
    std::vector<double> times;
    std::vector<double> values;
    double horizon = 0.0;
    bool truncated = false;
    bool absorbed = false;
};

struct WalkOutcome {
    std::size_t final_index = 0;
    double final_time = 0.0;
    std::uint64_t steps = 0;
    bool truncated = false;
    bool absorbed = false;
};

inline constexpr std::uint64_t kDefaultStepBudget = 1'000'000'000ULL;

// Core loop of the chain. `on_jump(time, index)` is called after every jump,
// including the last one, whose time is the first to reach the horizon.
template <class Observer>
WalkOutcome run_walk(const TransitionTable& table, std::size_t start, double horizon, RandomStream& rng,
                     Observer&& on_jump, std::uint64_t max_steps = kDefaultStepBudget) {
    WalkOutcome out;
    std::size_t j = start;
    double t = 0.0;
    const TransitionRow* rows = table.rows.data();
    while (t < horizon) {
        const TransitionRow& row = rows[j];
        if (row.kind == RowKind::absorbing) {
            out.absorbed = true;
            break;
        }
        if (row.kind == RowKind::edge) out.truncated = true;
        if (++out.steps > max_steps) throw RunawayError("simulation exceeded its step budget");
        if (rng.uniform() < row.p_plus) {
            t += row.t_plus;
            ++j;
        } else {
            t += row.t_minus;
            --j;
        }
        on_jump(t, j);
    }
    if (rows[j].kind == RowKind::absorbing) out.absorbed = true;
    out.final_index = j;
    out.final_time = t;
    return out;
}

// Starting index: x0 itself when it is a grid point, otherwise one of its two
// neighbors, the upper one with probability v0 on (lower, x0, upper).
std::size_t init_state(const DiffusionSpec& spec, const Grid& grid, double x0, RandomStream& rng);

PathRecord simulate(const DiffusionSpec& spec, const Grid& grid, const TransitionTable& table, double x0,
                    double horizon, const RngSpec& rng, std::uint64_t max_steps = kDefaultStepBudget);

// Value of the piecewise-constant right-continuous path at time t.
double value_at(const PathRecord& path, double t);

struct TerminalBatch {
    std::vector<double> horizons;
    std::vector<std::vector<double>> values;  // values[h][path]
    std::vector<std::uint8_t> truncated;      // per path
    std::vector<std::uint8_t> absorbed;       // per path
    std::uint64_t total_steps = 0;
    std::size_t truncated_count() const;
    std::size_t absorbed_count() const;
};

// Path p uses the stream (master_seed, p), so results do not depend on the
// number of threads.
TerminalBatch simulate_terminal(const DiffusionSpec& spec, const Grid& grid, const TransitionTable& table, double x0,
                                std::vector<double> horizons, std::size_t n_paths, std::uint64_t master_seed,
                                int threads = 1, std::uint64_t max_steps = kDefaultStepBudget);

enum class EmbedMode {
    restart,     // every interior point gets n independent exits started there
    continuous,  // one path from x0, recording every grid transition
};

struct EmbedPoint {
    std::size_t index;
    double x;
    std::size_t crossings;
    double p_hat;
    double standard_error;
    double mean_time;  // mean time to reach a neighbor
};

// Standard Brownian motion (generator u''/2) on a fine time step with
// Brownian-bridge crossing detection; the empirical law of successive grid
// visits is compared with the chain's transition table.
std::vector<EmbedPoint> embed_oracle_bm(const Grid& grid, double x0, std::size_t n_paths, double dt_fine,
                                        const RngSpec& rng, EmbedMode mode = EmbedMode::restart, int threads = 1);

void write_path_csv(std::ostream& out, const PathRecord& path);

}  // namespace stmca

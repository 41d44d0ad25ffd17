#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "appgame/cooperative.hpp"
#include "appgame/solvers.hpp"

namespace appgame {

enum class Regime { Nonaggressive, Conflict };

struct RatioSummary {
    double min = 0.0, max = 0.0, final_value = 0.0;
};

struct RegimeReport {
    Regime regime = Regime::Nonaggressive;
    std::optional<double> onset1, onset2; // first margin activation per player
    std::array<double, 2> welfare{};
    std::array<double, 2> coop_welfare{};
    std::array<double, 2> efficiency_loss{};
    double efficiency_loss_total = 0.0;
    bool baseline_available = false;
    std::string baseline_error;
    double cumulative_deadweight = 0.0;
    double cumulative_outlays = 0.0;
    std::array<RatioSummary, 2> inequality; // (gamma lam_i - lam_j)/lam_i over the samples
};

// Payoff integral of one player over the trajectory's dense output, by
// composite adaptive Lobatto quadrature per integrator segment. A positive
// max_panel_width forces uniform subpanels no wider than that.
double welfare(const Trajectory& traj, int player, const ModelParams& p,
               double abs_tol = 1e-8, double max_panel_width = 0.0);

// Regime and onset times only (samples plus event log; strict margin > 0).
struct RegimeClassification {
    Regime regime = Regime::Nonaggressive;
    std::optional<double> onset1, onset2;
};
RegimeClassification classify_regime(const Trajectory& traj);

struct EfficiencyLoss {
    std::array<double, 2> per_player{};
    double total = 0.0;
    std::array<double, 2> coop_welfare{};
    bool available = false;
    std::string error;
};

// Cooperative baseline on the pooled endowment x10 + x20 with the weight
// matched to initial shares (pi = x10/(x10+x20)); DW_i = coop W_i - game W_i.
EfficiencyLoss efficiency_loss(const Trajectory& traj, const ModelParams& p,
                               TerminalMode mode = TerminalMode::ExhaustWealth);

// (gamma lam_i - lam_j)/lam_i for each player.
std::array<double, 2> inequality_ratio(const GameState& s, const ModelParams& p);

// Full post-processing: classification, welfare, baseline comparison,
// cumulative deadweight/outlays, inequality path summary.
RegimeReport build_report(const Trajectory& traj, const ModelParams& p,
                          bool with_baseline = true,
                          TerminalMode mode = TerminalMode::ExhaustWealth);

struct SimulationSpec {
    ModelParams params;
    double x10 = 1.0, x20 = 1.0;
    ShootOptions shoot_opts;
    IntegrateOptions integ_opts;
    std::optional<std::array<double, 2>> guess;
};

struct SimulationResult {
    ShootingResult shot;
    Trajectory trajectory;
    RegimeReport report;
};

// shoot -> integrate (with the output grid) -> report. Throws SolverFailure on
// shooting non-convergence.
SimulationResult simulate(const SimulationSpec& spec, bool with_baseline = true);

struct SweepAxis {
    std::string param; // a ModelParams field name, "x10" or "x20"
    std::vector<double> values;
};

struct SweepGrid {
    std::vector<SweepAxis> axes; // 1 or 2
    std::size_t max_cells = 10000;
    int threads = 0; // 0 = hardware concurrency
    // called after each completed cell with (done, total); must be thread-safe
    std::function<void(std::size_t, std::size_t)> progress;
};

struct SweepCell {
    std::size_t index = 0;            // row-major
    std::vector<double> axis_values;
    std::string status;               // "ok" or a diagnostic
    bool ok = false;
    ShootingResult shot;
    RegimeReport report;
};

// Evaluates shoot + integrate + classify per cell. Cells are independent and
// may run concurrently; the output is row-major regardless of execution order.
std::vector<SweepCell> sweep(const SimulationSpec& base, const SweepGrid& grid);

} // namespace appgame

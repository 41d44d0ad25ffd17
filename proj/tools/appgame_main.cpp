#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <string>

#include <CLI11.hpp>

#include "appgame/config.hpp"
#include "appgame/io.hpp"
#include "appgame/model.hpp"

#include <unistd.h>

namespace {

namespace fs = std::filesystem;
using namespace appgame;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitSolver = 2;

void print_error(const std::string& msg) {
    const bool color = ::isatty(2) && std::getenv("NO_COLOR") == nullptr;
    std::cerr << (color ? "\033[31merror:\033[0m " : "error: ") << msg << "\n";
}

struct CommonArgs {
    std::string config_path;
    std::string out_dir;   // overrides config.output_dir when nonempty
    double tol = 0.0;      // overrides the shooting tolerance when positive
    bool plot = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_plot) {
    cmd->add_option("--config", args.config_path, "path to the run configuration (JSON)")
        ->required();
    cmd->add_option("--out", args.out_dir, "output directory (overrides the config)");
    cmd->add_option("--tol", args.tol, "override the shooting tolerance");
    if (with_plot)
        cmd->add_flag("--plot", args.plot, "also write a plot CSV and a static SVG of the paths");
}

RunConfig load(const CommonArgs& args) {
    RunConfig cfg = load_config(args.config_path);
    if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
    if (args.tol > 0.0) cfg.shooting_tol = args.tol;
    return cfg;
}

fs::path prepare_out_dir(const RunConfig& cfg) {
    fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    return dir;
}

int cmd_simulate(const CommonArgs& args) {
    const RunConfig cfg = load(args);
    const fs::path dir = prepare_out_dir(cfg);
    const SimulationResult res = simulate(cfg.to_spec());
    io::write_file_atomic((dir / "trajectory.csv").string(),
                          io::trajectory_csv(res.trajectory, cfg.params));
    io::write_file_atomic((dir / "report.json").string(),
                          io::report_json(res.report, res.shot, res.trajectory));
    if (args.plot) {
        io::write_file_atomic((dir / "plot.csv").string(),
                              io::plot_csv(res.trajectory, cfg.params));
        io::write_file_atomic((dir / "paths.svg").string(),
                              io::paths_svg(res.trajectory, cfg.params));
    }
    std::cout << "regime: "
              << (res.report.regime == Regime::Nonaggressive ? "nonaggressive" : "conflict")
              << "  welfare: (" << res.report.welfare[0] << ", " << res.report.welfare[1]
              << ")  deadweight: " << res.report.cumulative_deadweight << "\n"
              << "wrote " << (dir / "trajectory.csv").string() << ", "
              << (dir / "report.json").string() << "\n";
    return kExitOk;
}

int cmd_cooperate(const CommonArgs& args) {
    const RunConfig cfg = load(args);
    const fs::path dir = prepare_out_dir(cfg);
    const double x0 = cfg.x10 + cfg.x20;
    ShootOptions opt = cfg.shoot_options();
    opt.integ.sample_count = cfg.samples;
    const CoopTrajectory coop = coop_solve(x0, cfg.params, opt);
    if (!coop.converged)
        throw SolverFailure("cooperative shooting failed; residual " +
                            std::to_string(coop.residual[0]));
    io::write_file_atomic((dir / "coop_trajectory.csv").string(),
                          io::coop_trajectory_csv(coop, cfg.params.pi_weight));
    io::write_file_atomic((dir / "coop_report.json").string(),
                          io::coop_report_json(coop, x0, cfg.params));
    const double c0 = coop.samples.empty() ? 0.0 : coop.samples.front().c;
    std::cout << "lam0: " << coop.lam0 << "  c(0): " << c0
              << "  c(0)*T/x0: " << c0 * cfg.params.horizon_T / x0 << "\n"
              << "wrote " << (dir / "coop_trajectory.csv").string() << ", "
              << (dir / "coop_report.json").string() << "\n";
    return kExitOk;
}

int cmd_steady(const CommonArgs& args) {
    const RunConfig cfg = load(args);
    const fs::path dir = prepare_out_dir(cfg);
    GameState guess;
    if (cfg.steady_guess) {
        guess = *cfg.steady_guess;
    } else {
        const auto xbar = golden_rule_stock(cfg.params);
        const double xg = xbar.value_or(0.5 * (cfg.x10 + cfg.x20));
        const double prod = std::max(production(xg, cfg.params), 1e-6);
        guess = GameState{0.0, xg, xg, marginal_utility(prod, cfg.params),
                          marginal_utility(prod, cfg.params)};
    }
    SteadyStateOptions opt;
    opt.tol = cfg.steady_state_tol;
    const SteadyStateResult res = steady_state(guess, cfg.params, opt);
    io::write_file_atomic((dir / "steady_report.json").string(),
                          io::steady_report_json(res, cfg.params));
    std::cout << (res.converged ? "converged" : "did not converge") << ": x = (" << res.state.x1
              << ", " << res.state.x2 << "), lam = (" << res.state.lam1 << ", " << res.state.lam2
              << "), residual " << res.residual_norm << "\n"
              << "wrote " << (dir / "steady_report.json").string() << "\n";
    if (!res.converged) {
        print_error("steady-state iteration did not converge: " + res.message);
        return kExitSolver;
    }
    return kExitOk;
}

int cmd_compare(const CommonArgs& args) {
    const RunConfig cfg = load(args);
    const fs::path dir = prepare_out_dir(cfg);
    const SimulationResult res = simulate(cfg.to_spec());

    // share-matched cooperative baseline, re-solved here for its trajectory
    ModelParams pc = cfg.params;
    pc.pi_weight = cfg.x10 / (cfg.x10 + cfg.x20);
    ShootOptions copt = cfg.shoot_options();
    copt.integ.sample_count = cfg.samples;
    const CoopTrajectory coop = coop_solve(cfg.x10 + cfg.x20, pc, copt);

    io::write_file_atomic((dir / "trajectory.csv").string(),
                          io::trajectory_csv(res.trajectory, cfg.params));
    io::write_file_atomic((dir / "coop_trajectory.csv").string(),
                          io::coop_trajectory_csv(coop, pc.pi_weight));
    io::write_file_atomic((dir / "compare_report.json").string(),
                          io::compare_report_json(res.report, res.shot, res.trajectory, coop));
    if (args.plot) {
        io::write_file_atomic((dir / "plot.csv").string(),
                              io::plot_csv(res.trajectory, cfg.params));
        io::write_file_atomic((dir / "paths.svg").string(),
                              io::paths_svg(res.trajectory, cfg.params));
    }
    std::cout << "efficiency loss: (" << res.report.efficiency_loss[0] << ", "
              << res.report.efficiency_loss[1] << "), total " << res.report.efficiency_loss_total
              << "  deadweight: " << res.report.cumulative_deadweight << "\n"
              << "wrote " << (dir / "compare_report.json").string() << "\n";
    return kExitOk;
}

int cmd_sweep(const CommonArgs& args) {
    const RunConfig cfg = load(args);
    if (!cfg.sweep_grid)
        throw std::invalid_argument("config: sweep requires a 'sweep' section with axes");
    const fs::path dir = prepare_out_dir(cfg);

    SweepGrid grid = *cfg.sweep_grid;
    std::mutex io_mutex;
    std::size_t last_pct = 0;
    grid.progress = [&](std::size_t done, std::size_t total) {
        const std::size_t pct = done * 100 / total;
        std::lock_guard<std::mutex> lock(io_mutex);
        if (pct >= last_pct + 5 || done == total) {
            last_pct = pct;
            std::cerr << "sweep: " << done << "/" << total << " cells\n";
        }
    };

    const std::vector<SweepCell> cells = sweep(cfg.to_spec(), grid);
    io::write_file_atomic((dir / "sweep.csv").string(), io::sweep_csv(cells, grid));
    io::write_file_atomic((dir / "sweep_summary.json").string(),
                          io::sweep_summary_json(cells, grid));

    std::size_t ok = 0;
    for (const auto& c : cells) ok += c.ok ? 1 : 0;
    std::cout << "cells: " << cells.size() << "  ok: " << ok << "  failed: " << cells.size() - ok
              << "\nwrote " << (dir / "sweep.csv").string() << ", "
              << (dir / "sweep_summary.json").string() << "\n";
    if (ok == 0) {
        print_error("every sweep cell failed");
        return kExitSolver;
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-player production and appropriation game: equilibrium solver"};
    app.require_subcommand(1);

    CommonArgs sim_args, coop_args, steady_args, compare_args, sweep_args;
    auto* sim = app.add_subcommand("simulate", "solve the game BVP and write trajectory + report");
    add_common(sim, sim_args, true);
    auto* coop = app.add_subcommand("cooperate", "solve the cooperative baseline on the pooled endowment");
    add_common(coop, coop_args, false);
    auto* steady = app.add_subcommand("steady", "find a stationary state of the game");
    add_common(steady, steady_args, false);
    auto* compare = app.add_subcommand("compare", "simulate, solve the baseline, and report the welfare gap");
    add_common(compare, compare_args, true);
    auto* swp = app.add_subcommand("sweep", "run a parameter grid and write a regime map table");
    add_common(swp, sweep_args, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (sim->parsed()) return cmd_simulate(sim_args);
        if (coop->parsed()) return cmd_cooperate(coop_args);
        if (steady->parsed()) return cmd_steady(steady_args);
        if (compare->parsed()) return cmd_compare(compare_args);
        if (swp->parsed()) return cmd_sweep(sweep_args);
    } catch (const std::invalid_argument& e) {
        print_error(e.what());
        return kExitConfig;
    } catch (const SolverFailure& e) {
        print_error(e.what());
        return kExitSolver;
    } catch (const StateCollapse& e) {
        print_error(e.what());
        return kExitSolver;
    } catch (const std::exception& e) {
        print_error(e.what());
        return kExitSolver;
    }
    return kExitConfig;
}

#include "appgame/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "appgame/model.hpp"
#include "appgame/quadrature.hpp"

namespace appgame {

namespace {

// Composite quadrature over the trajectory's dense segments (the integrand is
// smooth inside each segment; events and steps sit on segment boundaries).
template <class Segments, class F>
double integrate_over_segments(const Segments& segs, double total_len, F&& integrand,
                               double abs_tol, double max_panel_width) {
    if (segs.empty() || total_len <= 0.0) return 0.0;
    double acc = 0.0;
    for (const auto& seg : segs) {
        const double len = seg.t_end - seg.t0;
        if (len <= 0.0) continue;
        const double seg_tol = abs_tol * (len / total_len);
        if (max_panel_width > 0.0 && len > max_panel_width) {
            const int panels = static_cast<int>(std::ceil(len / max_panel_width));
            for (int k = 0; k < panels; ++k) {
                const double a = seg.t0 + len * k / panels;
                const double b = seg.t0 + len * (k + 1) / panels;
                acc += lobatto_integrate([&](double t) { return integrand(seg, t); }, a, b,
                                         seg_tol / panels);
            }
        } else {
            acc += lobatto_integrate([&](double t) { return integrand(seg, t); }, seg.t0,
                                     seg.t_end, seg_tol);
        }
    }
    return acc;
}

GameState floored_state(GameState s) {
    s.lam1 = std::max(s.lam1, 1e-300);
    s.lam2 = std::max(s.lam2, 1e-300);
    s.x1 = std::max(s.x1, 0.0);
    s.x2 = std::max(s.x2, 0.0);
    return s;
}

} // namespace

double welfare(const Trajectory& traj, int player, const ModelParams& p, double abs_tol,
               double max_panel_width) {
    const double total = traj.t_end() - traj.t_begin();
    return integrate_over_segments(
        traj.segments(), total,
        [&](const DenseSegment<4>& seg, double t) {
            const auto y = seg.eval(t);
            const double lam = player == 1 ? y[2] : y[3];
            return felicity(optimal_consumption(lam, p), p);
        },
        abs_tol, max_panel_width);
}

RegimeClassification classify_regime(const Trajectory& traj) {
    RegimeClassification out;
    for (const auto& ev : traj.events) {
        if (ev.kind != EventKind::MarginOn) continue;
        if (ev.player == 1 && !out.onset1) out.onset1 = ev.t;
        if (ev.player == 2 && !out.onset2) out.onset2 = ev.t;
    }
    bool any_positive = out.onset1.has_value() || out.onset2.has_value();
    for (const auto& s : traj.samples)
        if (s.ctrl1.a > 0.0 || s.ctrl2.a > 0.0) any_positive = true;
    out.regime = any_positive ? Regime::Conflict : Regime::Nonaggressive;
    return out;
}

std::array<double, 2> inequality_ratio(const GameState& s, const ModelParams& p) {
    if (!(s.lam1 > 0.0 && s.lam2 > 0.0))
        throw std::domain_error("inequality_ratio: shadow prices must be positive");
    return {(p.gamma * s.lam1 - s.lam2) / s.lam1, (p.gamma * s.lam2 - s.lam1) / s.lam2};
}

EfficiencyLoss efficiency_loss(const Trajectory& traj, const ModelParams& p, TerminalMode mode) {
    EfficiencyLoss out;
    const GameState& init = traj.initial_state();
    if (traj.t_end() <= traj.t_begin()) { // zero-length horizon
        out.available = true;
        return out;
    }
    const double x10 = init.x1, x20 = init.x2;
    const double pooled = x10 + x20;
    const double share1 = x10 / pooled;

    ModelParams pc = p;
    pc.pi_weight = share1;

    ShootOptions copt;
    copt.mode = mode;
    copt.integ.sample_count = 0;

    CoopTrajectory coop;
    try {
        coop = coop_solve(pooled, pc, copt);
    } catch (const std::exception& e) {
        out.error = e.what();
        return out;
    }
    if (!coop.converged) {
        out.error = "cooperative baseline failed to converge: residual " +
                    std::to_string(coop.residual[0]);
        return out;
    }

    const double quad_tol = 1e-10;
    const double coop_len = coop.t_end() - coop.t_begin();
    const std::array<double, 2> shares{share1, 1.0 - share1};
    for (int i = 0; i < 2; ++i) {
        out.coop_welfare[i] = integrate_over_segments(
            coop.segments(), coop_len,
            [&](const DenseSegment<2>& seg, double t) {
                const auto y = seg.eval(t);
                return felicity(shares[i] * inverse_marginal_utility(y[1], pc), pc);
            },
            quad_tol, 0.0);
        const double game_w = welfare(traj, i + 1, p, quad_tol);
        out.per_player[i] = out.coop_welfare[i] - game_w;
    }
    out.total = out.per_player[0] + out.per_player[1];
    out.available = true;
    return out;
}

RegimeReport build_report(const Trajectory& traj, const ModelParams& p, bool with_baseline,
                          TerminalMode mode) {
    RegimeReport rep;
    const RegimeClassification cls = classify_regime(traj);
    rep.regime = cls.regime;
    rep.onset1 = cls.onset1;
    rep.onset2 = cls.onset2;

    const double quad_tol = 1e-10;
    rep.welfare = {welfare(traj, 1, p, quad_tol), welfare(traj, 2, p, quad_tol)};

    const double total = traj.t_end() - traj.t_begin();
    rep.cumulative_deadweight = integrate_over_segments(
        traj.segments(), total,
        [&](const DenseSegment<4>& seg, double t) {
            const auto y = seg.eval(t);
            const GameState s = floored_state(GameState{t, y[0], y[1], y[2], y[3]});
            const ControlPair u1 = mne_controls(s, 1, p);
            const ControlPair u2 = mne_controls(s, 2, p);
            return accounting(s, u1, u2, p).deadweight_loss;
        },
        quad_tol, 0.0);
    rep.cumulative_outlays = integrate_over_segments(
        traj.segments(), total,
        [&](const DenseSegment<4>& seg, double t) {
            const auto y = seg.eval(t);
            const GameState s = floored_state(GameState{t, y[0], y[1], y[2], y[3]});
            return mne_controls(s, 1, p).a + mne_controls(s, 2, p).a;
        },
        quad_tol, 0.0);

    bool first = true;
    for (const auto& smp : traj.samples) {
        const GameState& s = smp.state;
        if (!(s.lam1 > 0.0 && s.lam2 > 0.0)) continue;
        const auto r = inequality_ratio(s, p);
        for (int i = 0; i < 2; ++i) {
            auto& sum = rep.inequality[i];
            if (first) {
                sum.min = sum.max = r[i];
            } else {
                sum.min = std::min(sum.min, r[i]);
                sum.max = std::max(sum.max, r[i]);
            }
            sum.final_value = r[i];
        }
        first = false;
    }

    if (with_baseline) {
        const EfficiencyLoss el = efficiency_loss(traj, p, mode);
        rep.baseline_available = el.available;
        rep.baseline_error = el.error;
        if (el.available) {
            rep.coop_welfare = el.coop_welfare;
            rep.efficiency_loss = el.per_player;
            rep.efficiency_loss_total = el.total;
        }
    }
    return rep;
}

SimulationResult simulate(const SimulationSpec& spec, bool with_baseline) {
    spec.params.validate();
    SimulationResult out;
    out.shot = shoot(spec.x10, spec.x20, spec.params, spec.shoot_opts, spec.guess);
    if (!out.shot.converged) {
        std::ostringstream msg;
        msg << "shooting failed to converge: " << out.shot.message << " (residual "
            << out.shot.residual[0] << ", " << out.shot.residual[1] << ")";
        throw SolverFailure(msg.str());
    }
    const GameState init{0.0, spec.x10, spec.x20, out.shot.lam10, out.shot.lam20};
    out.trajectory = integrate(init, spec.params, spec.integ_opts);
    out.report = build_report(out.trajectory, spec.params, with_baseline, spec.shoot_opts.mode);
    return out;
}

namespace {

using AxisSetter = std::function<void(SimulationSpec&, double)>;

const std::map<std::string, AxisSetter>& axis_setters() {
    static const std::map<std::string, AxisSetter> table = {
        {"delta", [](SimulationSpec& s, double v) { s.params.delta = v; }},
        {"theta", [](SimulationSpec& s, double v) { s.params.theta = v; }},
        {"gamma", [](SimulationSpec& s, double v) { s.params.gamma = v; }},
        {"horizon_T", [](SimulationSpec& s, double v) { s.params.horizon_T = v; }},
        {"eta", [](SimulationSpec& s, double v) { s.params.eta = v; }},
        {"tech_A", [](SimulationSpec& s, double v) { s.params.tech_A = v; }},
        {"tech_alpha", [](SimulationSpec& s, double v) { s.params.tech_alpha = v; }},
        {"tech_mu", [](SimulationSpec& s, double v) { s.params.tech_mu = v; }},
        {"pi_weight", [](SimulationSpec& s, double v) { s.params.pi_weight = v; }},
        {"x10", [](SimulationSpec& s, double v) { s.x10 = v; }},
        {"x20", [](SimulationSpec& s, double v) { s.x20 = v; }},
    };
    return table;
}

} // namespace

std::vector<SweepCell> sweep(const SimulationSpec& base, const SweepGrid& grid) {
    if (grid.axes.empty() || grid.axes.size() > 2)
        throw std::invalid_argument("sweep: expected 1 or 2 axes, got " +
                                    std::to_string(grid.axes.size()));
    std::size_t cells = 1;
    for (const auto& axis : grid.axes) {
        if (axis.values.empty())
            throw std::invalid_argument("sweep: axis '" + axis.param + "' has no values");
        if (axis_setters().find(axis.param) == axis_setters().end())
            throw std::invalid_argument("sweep: unknown axis parameter '" + axis.param + "'");
        cells *= axis.values.size();
    }
    if (cells > grid.max_cells)
        throw std::invalid_argument("sweep: grid has " + std::to_string(cells) +
                                    " cells, exceeding the limit of " +
                                    std::to_string(grid.max_cells));

    std::vector<SweepCell> out(cells);
    const std::size_t inner = grid.axes.size() == 2 ? grid.axes[1].values.size() : 1;
    std::atomic<std::size_t> completed{0};

    auto run_cell = [&](std::size_t idx) {
        SweepCell& cell = out[idx];
        cell.index = idx;
        SimulationSpec spec = base;
        spec.guess.reset(); // cells are independent: no warm starts
        for (std::size_t ax = 0; ax < grid.axes.size(); ++ax) {
            const std::size_t pos = ax == 0 ? idx / inner : idx % inner;
            const double v = grid.axes[ax].values[pos];
            cell.axis_values.push_back(v);
            axis_setters().at(grid.axes[ax].param)(spec, v);
        }
        try {
            spec.params.validate();
            if (!(spec.x10 > 0.0)) throw std::invalid_argument("x10 must be positive");
            if (!(spec.x20 > 0.0)) throw std::invalid_argument("x20 must be positive");
            SimulationResult r = simulate(spec, true);
            cell.shot = r.shot;
            cell.report = r.report;
            cell.ok = true;
            cell.status = "ok";
        } catch (const std::invalid_argument& e) {
            cell.status = std::string("config: ") + e.what();
        } catch (const std::exception& e) {
            cell.status = std::string("solver: ") + e.what();
        }
        if (grid.progress) grid.progress(completed.fetch_add(1) + 1, cells);
    };

    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    const std::size_t n_threads =
        std::min<std::size_t>(grid.threads > 0 ? static_cast<std::size_t>(grid.threads) : hw,
                              cells);
    if (n_threads <= 1) {
        for (std::size_t i = 0; i < cells; ++i) run_cell(i);
        return out;
    }

    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(n_threads);
    for (std::size_t w = 0; w < n_threads; ++w) {
        workers.emplace_back([&]() {
            while (true) {
                const std::size_t idx = next.fetch_add(1);
                if (idx >= cells) break;
                run_cell(idx);
            }
        });
    }
    for (auto& th : workers) th.join();
    return out;
}

} // namespace appgame

#include "appgame/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "appgame/model.hpp"

namespace appgame::io {

namespace {

using json = nlohmann::ordered_json;

double margin_or_ninf(const GameState& s, int player, const ModelParams& p) {
    const int other = player == 1 ? 2 : 1;
    if (!(s.wealth(other) > 0.0) || !(s.price(player) > 0.0))
        return -std::numeric_limits<double>::infinity();
    return aggression_margin(s.wealth(other), s.price(player), s.price(other), p).margin;
}

const char* event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::MarginOn: return "margin-on";
        case EventKind::MarginOff: return "margin-off";
        case EventKind::Collapse: return "collapse";
    }
    return "?";
}

json events_json(const Trajectory& traj) {
    json evs = json::array();
    for (const auto& ev : traj.events) {
        json e;
        e["t"] = ev.t;
        e["kind"] = event_kind_name(ev.kind);
        e["player"] = ev.player;
        if (ev.kind == EventKind::Collapse)
            e["component"] = ev.component == 'x' ? "wealth" : "shadow-price";
        evs.push_back(e);
    }
    return evs;
}

json stats_json(const SolverStats& st) {
    return {{"integrator_steps", st.steps_accepted},
            {"integrator_rejected", st.steps_rejected},
            {"rhs_evaluations", st.rhs_evals},
            {"last_step", st.last_step}};
}

json onset_json(const std::optional<double>& t) {
    if (t) return *t;
    return nullptr;
}

json regime_core_json(const RegimeReport& rep) {
    json j;
    j["regime"] = rep.regime == Regime::Nonaggressive ? "nonaggressive" : "conflict";
    j["onset_times"] = {{"player1", onset_json(rep.onset1)}, {"player2", onset_json(rep.onset2)}};
    j["welfare"] = {{"player1", rep.welfare[0]}, {"player2", rep.welfare[1]}};
    if (rep.baseline_available) {
        j["coop_welfare"] = {{"player1", rep.coop_welfare[0]}, {"player2", rep.coop_welfare[1]}};
        j["efficiency_loss"] = {{"player1", rep.efficiency_loss[0]},
                                {"player2", rep.efficiency_loss[1]},
                                {"total", rep.efficiency_loss_total}};
    } else {
        j["coop_welfare"] = nullptr;
        j["efficiency_loss"] = nullptr;
        j["baseline_error"] = rep.baseline_error;
    }
    j["deadweight"] = rep.cumulative_deadweight;
    return j;
}

} // namespace

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string trajectory_csv(const Trajectory& traj, const ModelParams& p) {
    std::ostringstream out;
    out << "t,x1,x2,lambda1,lambda2,c1,c2,a1,a2,margin1,margin2,deadweight\n";
    for (const auto& s : traj.samples) {
        out << format_g17(s.state.t) << ',' << format_g17(s.state.x1) << ','
            << format_g17(s.state.x2) << ',' << format_g17(s.state.lam1) << ','
            << format_g17(s.state.lam2) << ',' << format_g17(s.ctrl1.c) << ','
            << format_g17(s.ctrl2.c) << ',' << format_g17(s.ctrl1.a) << ','
            << format_g17(s.ctrl2.a) << ',' << format_g17(margin_or_ninf(s.state, 1, p)) << ','
            << format_g17(margin_or_ninf(s.state, 2, p)) << ','
            << format_g17(s.acct.deadweight_loss) << '\n';
    }
    return out.str();
}

std::string coop_trajectory_csv(const CoopTrajectory& traj, double pi_weight) {
    std::ostringstream out;
    out << "t,x,lambda,c,x1,x2,c1,c2\n";
    for (const auto& s : traj.samples) {
        out << format_g17(s.t) << ',' << format_g17(s.x) << ',' << format_g17(s.lam) << ','
            << format_g17(s.c) << ',' << format_g17(pi_weight * s.x) << ','
            << format_g17((1.0 - pi_weight) * s.x) << ',' << format_g17(pi_weight * s.c) << ','
            << format_g17((1.0 - pi_weight) * s.c) << '\n';
    }
    return out.str();
}

std::string report_json(const RegimeReport& rep, const ShootingResult& shot,
                        const Trajectory& traj) {
    json j = regime_core_json(rep);
    json st = stats_json(traj.stats);
    st["shooting_iterations"] = shot.iterations;
    st["shooting_integrations"] = shot.integrations;
    st["shooting_residual"] = {shot.residual[0], shot.residual[1]};
    st["shooting_converged"] = shot.converged;
    st["lam10"] = shot.lam10;
    st["lam20"] = shot.lam20;
    st["events"] = events_json(traj);
    st["collapsed"] = traj.collapsed();
    j["solver_stats"] = st;
    return j.dump(2) + "\n";
}

std::string coop_report_json(const CoopTrajectory& traj, double x0, const ModelParams& p) {
    json j;
    const double c0 = traj.samples.empty() ? 0.0 : traj.samples.front().c;
    j["lam0"] = traj.lam0;
    j["c0"] = c0;
    j["c0_T_over_x0"] = c0 * p.horizon_T / x0;
    j["x_final"] = traj.samples.empty() ? x0 : traj.samples.back().x;
    j["converged"] = traj.converged;
    j["residual"] = traj.residual[0];
    j["iterations"] = traj.iterations;
    j["solver_stats"] = stats_json(traj.stats);
    return j.dump(2) + "\n";
}

std::string steady_report_json(const SteadyStateResult& r, const ModelParams& p) {
    json j;
    j["converged"] = r.converged;
    j["classification"] = r.interior ? "interior" : "trivial";
    j["state"] = {{"x1", r.state.x1},
                  {"x2", r.state.x2},
                  {"lam1", r.state.lam1},
                  {"lam2", r.state.lam2}};
    j["residuals"] = {r.residuals[0], r.residuals[1], r.residuals[2], r.residuals[3]};
    j["residual_norm"] = r.residual_norm;
    j["iterations"] = r.iterations;
    j["message"] = r.message;
    const auto tr = trivial_state_residuals(p);
    j["trivial_state_residuals"] = {tr[0], tr[1]};
    return j.dump(2) + "\n";
}

std::string compare_report_json(const RegimeReport& rep, const ShootingResult& shot,
                                const Trajectory& traj, const CoopTrajectory& coop) {
    json j = regime_core_json(rep);
    j["cumulative_outlays"] = rep.cumulative_outlays;
    json st;
    st["game"] = stats_json(traj.stats);
    st["game"]["shooting_iterations"] = shot.iterations;
    st["game"]["shooting_residual"] = {shot.residual[0], shot.residual[1]};
    st["game"]["lam10"] = shot.lam10;
    st["game"]["lam20"] = shot.lam20;
    st["coop"] = stats_json(coop.stats);
    st["coop"]["lam0"] = coop.lam0;
    st["coop"]["iterations"] = coop.iterations;
    st["coop"]["residual"] = coop.residual[0];
    j["solver_stats"] = st;
    return j.dump(2) + "\n";
}

std::string sweep_csv(const std::vector<SweepCell>& cells, const SweepGrid& grid) {
    std::ostringstream out;
    for (const auto& axis : grid.axes) out << axis.param << ',';
    out << "status,regime,onset1,onset2,lam10,lam20,residual1,residual2,shoot_iterations,"
           "welfare1,welfare2,coop_welfare1,coop_welfare2,loss1,loss2,loss_total,"
           "deadweight,outlays\n";
    for (const auto& cell : cells) {
        for (double v : cell.axis_values) out << format_g17(v) << ',';
        if (!cell.ok) {
            std::string msg = cell.status;
            for (char& ch : msg)
                if (ch == ',' || ch == '\n') ch = ';';
            out << msg << ",,,,,,,,,,,,,,,,\n";
            continue;
        }
        const RegimeReport& r = cell.report;
        out << "ok," << (r.regime == Regime::Nonaggressive ? "nonaggressive" : "conflict") << ','
            << (r.onset1 ? format_g17(*r.onset1) : "") << ','
            << (r.onset2 ? format_g17(*r.onset2) : "") << ',' << format_g17(cell.shot.lam10)
            << ',' << format_g17(cell.shot.lam20) << ',' << format_g17(cell.shot.residual[0])
            << ',' << format_g17(cell.shot.residual[1]) << ',' << cell.shot.iterations << ','
            << format_g17(r.welfare[0]) << ',' << format_g17(r.welfare[1]) << ','
            << format_g17(r.coop_welfare[0]) << ',' << format_g17(r.coop_welfare[1]) << ','
            << format_g17(r.efficiency_loss[0]) << ',' << format_g17(r.efficiency_loss[1]) << ','
            << format_g17(r.efficiency_loss_total) << ',' << format_g17(r.cumulative_deadweight)
            << ',' << format_g17(r.cumulative_outlays) << '\n';
    }
    return out.str();
}

std::string sweep_summary_json(const std::vector<SweepCell>& cells, const SweepGrid& grid) {
    json j;
    json axes = json::array();
    for (const auto& axis : grid.axes)
        axes.push_back({{"param", axis.param}, {"values", axis.values}});
    j["axes"] = axes;
    std::size_t ok = 0, conflict = 0;
    for (const auto& c : cells) {
        if (c.ok) {
            ok += 1;
            if (c.report.regime == Regime::Conflict) conflict += 1;
        }
    }
    j["cells"] = cells.size();
    j["ok"] = ok;
    j["failed"] = cells.size() - ok;
    j["conflict_cells"] = conflict;
    j["nonaggressive_cells"] = ok - conflict;
    return j.dump(2) + "\n";
}

std::string plot_csv(const Trajectory& traj, const ModelParams&) {
    std::ostringstream out;
    out << "series,t,value\n";
    auto emit = [&](const char* name, auto&& get) {
        for (const auto& s : traj.samples)
            out << name << ',' << format_g17(s.state.t) << ',' << format_g17(get(s)) << '\n';
    };
    emit("x1", [](const Sample& s) { return s.state.x1; });
    emit("x2", [](const Sample& s) { return s.state.x2; });
    emit("a1", [](const Sample& s) { return s.ctrl1.a; });
    emit("a2", [](const Sample& s) { return s.ctrl2.a; });
    return out.str();
}

namespace {

std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

void svg_panel(std::ostringstream& out, double y_off, const std::string& title,
               const std::vector<double>& ts,
               const std::vector<std::pair<std::string, std::vector<double>>>& series) {
    const double w = 860.0, h = 260.0, x0 = 60.0, y0 = y_off + 30.0;
    double vmin = 0.0, vmax = 1e-12;
    for (const auto& [name, vs] : series)
        for (double v : vs) {
            if (std::isfinite(v)) {
                vmin = std::min(vmin, v);
                vmax = std::max(vmax, v);
            }
        }
    const double tmin = ts.front(), tmax = ts.back() > ts.front() ? ts.back() : ts.front() + 1.0;
    auto X = [&](double t) { return x0 + (t - tmin) / (tmax - tmin) * w; };
    auto Y = [&](double v) { return y0 + h - (v - vmin) / (vmax - vmin) * h; };

    out << "<text x=\"" << fmt6(x0) << "\" y=\"" << fmt6(y_off + 18.0)
        << "\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
    out << "<rect x=\"" << fmt6(x0) << "\" y=\"" << fmt6(y0) << "\" width=\"" << fmt6(w)
        << "\" height=\"" << fmt6(h) << "\" fill=\"none\" stroke=\"#999\"/>\n";
    const char* colors[] = {"#1f77b4", "#d62728"};
    int ci = 0;
    for (const auto& [name, vs] : series) {
        out << "<polyline fill=\"none\" stroke=\"" << colors[ci % 2] << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < ts.size(); ++i)
            out << fmt6(X(ts[i])) << ',' << fmt6(Y(vs[i])) << ' ';
        out << "\"/>\n";
        out << "<text x=\"" << fmt6(x0 + w - 80.0) << "\" y=\"" << fmt6(y0 + 18.0 + 16.0 * ci)
            << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << colors[ci % 2] << "\">"
            << name << "</text>\n";
        ci += 1;
    }
    out << "<text x=\"" << fmt6(x0) << "\" y=\"" << fmt6(y0 + h + 16.0)
        << "\" font-family=\"sans-serif\" font-size=\"11\">t in [" << fmt6(tmin) << ", "
        << fmt6(ts.back()) << "], range [" << fmt6(vmin) << ", " << fmt6(vmax) << "]</text>\n";
}

} // namespace

std::string paths_svg(const Trajectory& traj, const ModelParams&) {
    std::vector<double> ts, x1, x2, a1, a2;
    for (const auto& s : traj.samples) {
        ts.push_back(s.state.t);
        x1.push_back(s.state.x1);
        x2.push_back(s.state.x2);
        a1.push_back(s.ctrl1.a);
        a2.push_back(s.ctrl2.a);
    }
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"960\" height=\"680\" "
           "viewBox=\"0 0 960 680\">\n<rect width=\"960\" height=\"680\" fill=\"white\"/>\n";
    if (!ts.empty()) {
        svg_panel(out, 10.0, "wealth stocks", ts, {{"x1", x1}, {"x2", x2}});
        svg_panel(out, 350.0, "appropriation outlays", ts, {{"a1", a1}, {"a2", a2}});
    }
    out << "</svg>\n";
    return out.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("short write to '" + tmp.string() + "'");
    }
    fs::rename(tmp, target);
}

} // namespace appgame::io

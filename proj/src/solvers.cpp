#include "appgame/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "appgame/cooperative.hpp"
#include "appgame/model.hpp"

namespace appgame {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPriceFloor = 1e-300; // keeps control evaluation finite at a price collapse

using Vec4 = std::array<double, 4>;

GameState to_state(double t, const Vec4& y) { return GameState{t, y[0], y[1], y[2], y[3]}; }

GameState floored(GameState s) {
    s.lam1 = std::max(s.lam1, kPriceFloor);
    s.lam2 = std::max(s.lam2, kPriceFloor);
    return s;
}

// Margin value with the natural limits on the boundary: no opponent wealth (or
// no own valuation) means no incentive.
double margin_safe(const GameState& s, int player, const ModelParams& p) {
    const int other = player == 1 ? 2 : 1;
    if (!(s.wealth(other) > 0.0) || !(s.price(player) > 0.0)) return -kInf;
    return aggression_margin(s.wealth(other), s.price(player), s.price(other), p).margin;
}

// Canonical RHS, switching to the surviving player's single-agent problem when
// one side is out of the game.
struct GameRhs {
    const ModelParams* p = nullptr;
    int dead = 0; // 0: both alive; else the player whose wealth is exhausted

    void operator()(double t, const Vec4& y, Vec4& dy) const {
        if (dead == 0) {
            const StateRates r = canonical_rhs(to_state(t, y), *p);
            dy = {r.dx1, r.dx2, r.dlam1, r.dlam2};
            return;
        }
        const int sv = dead == 1 ? 2 : 1;
        const double x = sv == 1 ? y[0] : y[1];
        const double lam = sv == 1 ? y[2] : y[3];
        if (!(x > 0.0)) throw StateCollapse(sv, 'x', t, "survivor wealth exhausted");
        if (!(lam > 0.0)) throw StateCollapse(sv, 'l', t, "survivor shadow price vanished");
        const double c = inverse_marginal_utility(lam, *p);
        dy = {0.0, 0.0, 0.0, 0.0};
        (sv == 1 ? dy[0] : dy[1]) = production(x, *p) - c;
        (sv == 1 ? dy[2] : dy[3]) = -lam * marginal_product(x, *p);
    }
};

struct EventCandidate {
    double t = kInf;
    bool is_margin = false;
    int player = 0;     // margin owner or collapsed player
    bool new_active = false;
    int component = -1; // collapse: index into the state vector
};

int component_player(int comp) { return comp == 0 || comp == 2 ? 1 : 2; }
char component_tag(int comp) { return comp < 2 ? 'x' : 'l'; }

} // namespace

GameState Trajectory::at(double t) const {
    if (segs_.empty()) return init_;
    t = std::clamp(t, t0_, te_);
    // last segment whose start does not exceed t
    std::size_t lo = 0, hi = segs_.size() - 1;
    while (lo < hi) {
        const std::size_t mid = (lo + hi + 1) / 2;
        if (segs_[mid].t0 <= t)
            lo = mid;
        else
            hi = mid - 1;
    }
    const auto y = segs_[lo].eval(t);
    return to_state(t, y);
}

class GameIntegrator {
  public:
    GameIntegrator(const GameState& init, const ModelParams& p, const IntegrateOptions& opt)
        : p_(p), opt_(opt), init_(init) {}

    Trajectory run() {
        if (!(init_.x1 > 0.0 && init_.x2 > 0.0 && init_.lam1 > 0.0 && init_.lam2 > 0.0))
            throw std::invalid_argument("integrate: initial state must have positive wealth and prices");
        const double T = p_.horizon_T;
        if (init_.t > T) throw std::invalid_argument("integrate: initial time exceeds the horizon");

        Trajectory traj;
        traj.init_ = init_;
        traj.t0_ = init_.t;
        traj.te_ = init_.t;
        if (init_.t == T) { // zero-length horizon: a single sample
            assemble_samples(traj);
            return traj;
        }

        StepControl ctrl;
        ctrl.rel_tol = opt_.rel_tol;
        ctrl.abs_tol = opt_.abs_tol;
        ctrl.fixed_step = opt_.fixed_step;
        ctrl.max_steps = opt_.max_steps;

        GameRhs rhs{&p_, 0};
        Dopri5<4, GameRhs&> stepper(rhs, ctrl);
        Vec4 y{init_.x1, init_.x2, init_.lam1, init_.lam2};
        stepper.initialize(init_.t, y);

        bool active[2] = {margin_safe(init_, 1, p_) > 0.0, margin_safe(init_, 2, p_) > 0.0};
        bool done = false;

        while (!done && stepper.time() < T) {
            DenseSegment<4> seg;
            const auto outcome = stepper.step(T, seg);
            if (outcome == Dopri5<4, GameRhs&>::Outcome::DomainBlocked) {
                // pinned against the domain boundary; call it a collapse here
                handle_blocked(traj, stepper.time(), stepper.state(), rhs, stepper, done);
                continue;
            }

            EventCandidate ev = scan_events(seg, rhs.dead, active);
            if (!ev.is_margin && ev.component < 0) {
                traj.segs_.push_back(seg);
                continue;
            }

            // truncate the segment at the event and restart there
            seg.t_end = ev.t;
            auto y_ev = seg.eval(ev.t);
            traj.segs_.push_back(seg);

            if (ev.is_margin) {
                traj.events.push_back(Event{ev.t, ev.new_active ? EventKind::MarginOn : EventKind::MarginOff,
                                            ev.player, ' '});
                active[ev.player - 1] = ev.new_active;
                stepper.reinitialize(ev.t, y_ev);
            } else {
                y_ev[ev.component] = 0.0;
                traj.events.push_back(
                    Event{ev.t, EventKind::Collapse, component_player(ev.component), component_tag(ev.component)});
                if (opt_.switch_to_survivor && component_tag(ev.component) == 'x' && rhs.dead == 0 &&
                    premature(ev.t)) {
                    rhs.dead = component_player(ev.component);
                    active[0] = active[1] = false;
                    stepper.reinitialize(ev.t, y_ev);
                } else {
                    // exhaustion within resolution of the horizon is the
                    // transversality target, not a premature collapse
                    traj.collapsed_ = premature(ev.t);
                    traj.collapsed_player_ = component_player(ev.component);
                    traj.te_ = ev.t;
                    done = true;
                }
            }
        }

        if (!done) traj.te_ = stepper.time();
        const auto& st = stepper.stats();
        traj.stats = SolverStats{st.accepted, st.rejected, st.rhs_evals, st.last_step};
        assemble_samples(traj);
        return traj;
    }

  private:
    void handle_blocked(Trajectory& traj, double t, const Vec4& y, GameRhs& rhs,
                        Dopri5<4, GameRhs&>& stepper, bool& done) {
        // The smallest time-to-zero among the shrinking components names the culprit.
        Vec4 dy{};
        bool have_rates = true;
        try {
            rhs(t, y, dy);
        } catch (const StateCollapse&) {
            have_rates = false;
        }
        int comp = 0;
        double best = kInf;
        for (int c = 0; c < 4; ++c) {
            const double tau = (have_rates && dy[c] < 0.0) ? y[c] / -dy[c] : y[c];
            if (tau < best) {
                best = tau;
                comp = c;
            }
        }
        traj.events.push_back(Event{t, EventKind::Collapse, component_player(comp), component_tag(comp)});
        if (opt_.switch_to_survivor && component_tag(comp) == 'x' && rhs.dead == 0 &&
            premature(t)) {
            Vec4 y_ev = y;
            y_ev[comp] = 0.0;
            rhs.dead = component_player(comp);
            stepper.reinitialize(t, y_ev);
            done = false;
            return;
        }
        traj.collapsed_ = premature(t);
        traj.collapsed_player_ = component_player(comp);
        traj.te_ = t;
        done = true;
    }

    bool premature(double t) const {
        const double T = p_.horizon_T;
        return t < T - 1e-9 * std::max(1.0, T);
    }

    EventCandidate scan_events(const DenseSegment<4>& seg, int dead, const bool active[2]) {
        constexpr int kSubpoints = 8;
        EventCandidate best;
        const double t0 = seg.t0, te = seg.t_end;

        // component zero crossings (collapse)
        for (int c = 0; c < 4; ++c) {
            if (dead != 0 && component_player(c) == dead) continue;
            double t_prev = t0;
            double v_prev = seg.eval(t0)[c];
            for (int j = 1; j <= kSubpoints; ++j) {
                const double tj = t0 + (te - t0) * j / kSubpoints;
                const double vj = seg.eval(tj)[c];
                if (v_prev > 0.0 && vj <= 0.0) {
                    const double tc = bisect_value(seg, c, t_prev, tj);
                    if (tc < best.t) best = EventCandidate{tc, false, 0, false, c};
                    break;
                }
                t_prev = tj;
                v_prev = vj;
            }
        }

        // margin activations / deactivations
        if (dead == 0) {
            for (int player = 1; player <= 2; ++player) {
                const bool cur = active[player - 1];
                double t_prev = t0;
                for (int j = 1; j <= kSubpoints; ++j) {
                    const double tj = t0 + (te - t0) * j / kSubpoints;
                    const bool aj = margin_safe(to_state(tj, seg.eval(tj)), player, p_) > 0.0;
                    if (aj != cur) {
                        const double tm = bisect_margin(seg, player, cur, t_prev, tj);
                        if (tm > t0 + opt_.event_time_tol && tm < best.t)
                            best = EventCandidate{tm, true, player, !cur, -1};
                        break;
                    }
                    t_prev = tj;
                }
            }
        }
        return best;
    }

    double bisect_value(const DenseSegment<4>& seg, int comp, double a, double b) const {
        while (b - a > opt_.event_time_tol) {
            const double m = 0.5 * (a + b);
            if (seg.eval(m)[comp] > 0.0)
                a = m;
            else
                b = m;
        }
        return b;
    }

    double bisect_margin(const DenseSegment<4>& seg, int player, bool side_a, double a,
                         double b) const {
        while (b - a > opt_.event_time_tol) {
            const double m = 0.5 * (a + b);
            const bool am = margin_safe(to_state(m, seg.eval(m)), player, p_) > 0.0;
            if (am == side_a)
                a = m;
            else
                b = m;
        }
        return 0.5 * (a + b);
    }

    void assemble_samples(Trajectory& traj) const {
        std::vector<double> times;
        const double t0 = traj.t0_, te = traj.te_;
        const int n = opt_.sample_count;
        if (te <= t0) {
            times.push_back(t0);
        } else if (n >= 2) {
            times.reserve(static_cast<std::size_t>(n) + traj.events.size());
            for (int k = 0; k < n; ++k) times.push_back(t0 + (te - t0) * k / (n - 1));
        } else {
            times = {t0, te};
        }
        for (const auto& ev : traj.events)
            if (ev.t >= t0 && ev.t <= te) times.push_back(ev.t);
        std::sort(times.begin(), times.end());
        times.erase(std::unique(times.begin(), times.end()), times.end());

        traj.samples.reserve(times.size());
        for (double t : times) {
            GameState s = traj.at(t);
            s.x1 = std::max(s.x1, 0.0);
            s.x2 = std::max(s.x2, 0.0);
            s.lam1 = std::max(s.lam1, 0.0);
            s.lam2 = std::max(s.lam2, 0.0);
            const GameState se = floored(s);
            Sample smp;
            smp.state = s;
            smp.ctrl1 = mne_controls(se, 1, p_);
            smp.ctrl2 = mne_controls(se, 2, p_);
            smp.acct = accounting(se, smp.ctrl1, smp.ctrl2, p_);
            traj.samples.push_back(smp);
        }
    }

    const ModelParams& p_;
    const IntegrateOptions& opt_;
    GameState init_;
};

Trajectory integrate(const GameState& init, const ModelParams& p, const IntegrateOptions& opt) {
    return GameIntegrator(init, p, opt).run();
}

// ---------------------------------------------------------------------------
// shooting
// ---------------------------------------------------------------------------

namespace {

template <int N>
bool solve_linear(std::array<std::array<double, N>, N> A, std::array<double, N> b,
                  std::array<double, N>& x) {
    for (int col = 0; col < N; ++col) {
        int piv = col;
        for (int r = col + 1; r < N; ++r)
            if (std::fabs(A[r][col]) > std::fabs(A[piv][col])) piv = r;
        if (std::fabs(A[piv][col]) < 1e-300) return false;
        std::swap(A[piv], A[col]);
        std::swap(b[piv], b[col]);
        for (int r = col + 1; r < N; ++r) {
            const double f = A[r][col] / A[col][col];
            for (int cc = col; cc < N; ++cc) A[r][cc] -= f * A[col][cc];
            b[r] -= f * b[col];
        }
    }
    for (int r = N - 1; r >= 0; --r) {
        double s = b[r];
        for (int cc = r + 1; cc < N; ++cc) s -= A[r][cc] * x[cc];
        x[r] = s / A[r][r];
    }
    return true;
}

double norm_inf2(const std::array<double, 2>& v) {
    return std::max(std::fabs(v[0]), std::fabs(v[1]));
}

struct DefectFn {
    double x10, x20;
    const ModelParams* p;
    const ShootOptions* opt;
    std::size_t evals = 0;

    std::array<double, 2> operator()(const std::array<double, 2>& z) {
        evals += 1;
        GameState init{0.0, x10, x20, std::exp(z[0]), std::exp(z[1])};
        IntegrateOptions io = opt->integ;
        io.sample_count = 0;
        io.switch_to_survivor = false;
        Trajectory tr;
        try {
            tr = integrate(init, *p, io);
        } catch (const SolverFailure&) {
            return {1e6, 1e6}; // repels the line search from the stiff region
        }
        const double T = p->horizon_T;
        if (opt->mode == TerminalMode::ExhaustWealth) {
            if (!tr.collapsed()) {
                const GameState s = tr.at(T);
                return {s.x1 / x10, s.x2 / x20};
            }
            // Penalized residuals at a collapse. A wealth exhaustion keeps the
            // linear shortfall extrapolation (continuous into the interior
            // case); a price collapse means consumption blew up and wealth
            // would follow, so its player gets a time-based undershoot signal
            // that still slopes in the collapse time.
            const double tc = tr.t_end();
            char comp = 'x';
            int who = tr.collapsed_player();
            for (const auto& ev : tr.events)
                if (ev.kind == EventKind::Collapse) {
                    comp = ev.component;
                    who = ev.player;
                }
            GameState s = tr.at(tc);
            s.lam1 = std::max(s.lam1, 1e-2);
            s.lam2 = std::max(s.lam2, 1e-2);
            s.x1 = std::max(s.x1, 0.0);
            s.x2 = std::max(s.x2, 0.0);
            const ControlPair u1 = mne_controls(s, 1, *p);
            const ControlPair u2 = mne_controls(s, 2, *p);
            const double dx1 = state_rate(s.x1, s.x2, u1.c, u1.a, u2.a, *p);
            const double dx2 = state_rate(s.x2, s.x1, u2.c, u2.a, u1.a, *p);
            auto clip = [](double v) { return std::clamp(v, -10.0, 10.0); };
            std::array<double, 2> F{clip((s.x1 + (T - tc) * dx1) / x10),
                                    clip((s.x2 + (T - tc) * dx2) / x20)};
            if (comp == 'l') F[who - 1] = -(1.0 + (T - tc) / T);
            return F;
        }
        const double eps = opt->eps_terminal;
        if (!tr.collapsed()) {
            const GameState s = tr.at(T);
            return {(s.lam1 - eps) / (1.0 + eps), (s.lam2 - eps) / (1.0 + eps)};
        }
        const double tc = tr.t_end();
        const GameState s = tr.at(tc);
        return {(s.lam1 - eps) / (1.0 + eps) - (T - tc), (s.lam2 - eps) / (1.0 + eps) - (T - tc)};
    }
};

} // namespace

std::array<double, 2> default_costate_guess(double x10, double x20, const ModelParams& p) {
    // Each player's single-agent Ramsey shot; exact whenever the game path
    // stays nonaggressive, and a sound neighbourhood otherwise.
    auto single_agent = [&](double x0) {
        ModelParams ps = p;
        ps.pi_weight = 1.0; // one production site
        ShootOptions opt;
        opt.tol = 1e-6;
        opt.integ.rel_tol = 1e-7;
        opt.integ.abs_tol = 1e-10;
        try {
            const CoopTrajectory tr = coop_solve(x0, ps, opt);
            if (tr.converged && tr.lam0 > 0.0) return tr.lam0;
        } catch (const std::exception&) {
        }
        return marginal_utility(x0 / p.horizon_T, p);
    };
    return {single_agent(x10), single_agent(x20)};
}

namespace {

ShootingResult broyden_attempt(DefectFn& defect, std::array<double, 2> z,
                               const ShootOptions& opt) {
    std::array<double, 2> F = defect(z);
    double fnorm = norm_inf2(F);

    ShootingResult res;
    auto record = [&](bool converged, const std::string& msg) {
        res.lam10 = std::exp(z[0]);
        res.lam20 = std::exp(z[1]);
        res.residual = F;
        res.converged = converged;
        res.integrations = defect.evals;
        res.message = msg;
        return res;
    };

    if (fnorm < opt.tol) return record(true, "converged at the initial guess");

    const double fd_h = 1e-6;
    std::array<std::array<double, 2>, 2> J{};
    auto refresh_jacobian = [&]() {
        for (int j = 0; j < 2; ++j) {
            auto zj = z;
            zj[j] += fd_h;
            const auto Fj = defect(zj);
            J[0][j] = (Fj[0] - F[0]) / fd_h;
            J[1][j] = (Fj[1] - F[1]) / fd_h;
        }
    };
    refresh_jacobian();

    bool fresh_jacobian = true;
    for (int iter = 0; iter < opt.max_iter; ++iter) {
        std::array<double, 2> s{};
        if (!solve_linear<2>(J, {-F[0], -F[1]}, s)) {
            // saturated or degenerate derivatives: take a pseudo-Newton
            // descent on the residual itself
            s = {-F[0], -F[1]};
        }
        // trust region in log space
        const double smax = norm_inf2(s);
        if (smax > 2.0) {
            s[0] *= 2.0 / smax;
            s[1] *= 2.0 / smax;
        }

        double alpha = 1.0;
        std::array<double, 2> z_new{}, F_new{};
        double fnorm_new = kInf;
        bool improved = false;
        for (int ls = 0; ls < 11; ++ls) {
            z_new = {z[0] + alpha * s[0], z[1] + alpha * s[1]};
            if (std::fabs(z_new[0]) > 60.0 || std::fabs(z_new[1]) > 60.0) {
                alpha *= 0.5;
                continue;
            }
            F_new = defect(z_new);
            fnorm_new = norm_inf2(F_new);
            if (fnorm_new < fnorm) {
                improved = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!improved) {
            if (!fresh_jacobian) {
                refresh_jacobian();
                fresh_jacobian = true;
                continue; // retry the step with exact derivatives
            }
            return record(false, "line search stalled; best residual " + std::to_string(fnorm));
        }

        // Broyden good update
        const std::array<double, 2> dz{z_new[0] - z[0], z_new[1] - z[1]};
        const std::array<double, 2> dF{F_new[0] - F[0], F_new[1] - F[1]};
        const double dz2 = dz[0] * dz[0] + dz[1] * dz[1];
        if (dz2 > 0.0) {
            const std::array<double, 2> Jdz{J[0][0] * dz[0] + J[0][1] * dz[1],
                                            J[1][0] * dz[0] + J[1][1] * dz[1]};
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c) J[r][c] += (dF[r] - Jdz[r]) * dz[c] / dz2;
        }
        fresh_jacobian = false;

        z = z_new;
        F = F_new;
        fnorm = fnorm_new;
        res.iterations = iter + 1;

        if (fnorm < opt.tol) {
            // polish with exact-Jacobian Newton steps so multi-start runs land
            // on the same root to well below the convergence tolerance
            for (int polish = 0; polish < 2; ++polish) {
                refresh_jacobian();
                std::array<double, 2> ps{};
                if (!solve_linear<2>(J, {-F[0], -F[1]}, ps)) break;
                const std::array<double, 2> zp{z[0] + ps[0], z[1] + ps[1]};
                const auto Fp = defect(zp);
                if (norm_inf2(Fp) < fnorm) {
                    z = zp;
                    F = Fp;
                    fnorm = norm_inf2(Fp);
                    res.iterations += 1;
                } else {
                    break;
                }
            }
            return record(true, "converged");
        }
    }
    return record(false, "no convergence after " + std::to_string(opt.max_iter) +
                             " iterations; best residual " + std::to_string(fnorm));
}

} // namespace

ShootingResult shoot(double x10, double x20, const ModelParams& p, const ShootOptions& opt,
                     std::optional<std::array<double, 2>> guess) {
    if (!(x10 > 0.0 && x20 > 0.0))
        throw std::invalid_argument("shoot: initial endowments must be positive");

    DefectFn defect{x10, x20, &p, &opt};
    const std::array<double, 2> g = guess.value_or(default_costate_guess(x10, x20, p));
    if (!(g[0] > 0.0 && g[1] > 0.0))
        throw std::invalid_argument("shoot: costate guess components must be positive");

    ShootingResult best =
        broyden_attempt(defect, {std::log(g[0]), std::log(g[1])}, opt);
    if (best.converged || guess.has_value()) {
        best.integrations = defect.evals;
        return best;
    }
    // fixed restart ladder around the default guess
    static constexpr double restart[][2] = {{2.0, 2.0}, {0.5, 0.5}, {4.0, 1.0}, {1.0, 4.0},
                                            {8.0, 8.0}, {0.25, 1.0}, {1.0, 0.25}};
    for (const auto& m : restart) {
        ShootingResult r = broyden_attempt(
            defect, {std::log(g[0] * m[0]), std::log(g[1] * m[1])}, opt);
        if (r.converged) {
            r.integrations = defect.evals;
            return r;
        }
        if (norm_inf2(r.residual) < norm_inf2(best.residual)) best = r;
    }
    best.integrations = defect.evals;
    return best;
}

// ---------------------------------------------------------------------------
// stationary states
// ---------------------------------------------------------------------------

std::array<double, 4> steady_state_residuals(const GameState& s, const ModelParams& p) {
    // Increasing, strictly concave technology convention (y' > 0, y'' < 0 away
    // from the golden-rule stock) throughout.
    const double a1 = optimal_appropriation(s.x2, s.lam1, s.lam2, p);
    const double a2 = optimal_appropriation(s.x1, s.lam2, s.lam1, p);
    const double loss1 = loss_fraction(a1, p.theta); // inflicted by player 1
    const double loss2 = loss_fraction(a2, p.theta);
    const double c1 = optimal_consumption(s.lam1, p);
    const double c2 = optimal_consumption(s.lam2, p);

    auto consumption_stationarity = [&](double x_i, double lam_i, double lam_j, double loss_j) {
        return marginal_product(x_i, p) - p.delta * loss_j * (lam_i - p.gamma * lam_j) / lam_i;
    };
    auto flow_balance = [&](double x_i, double c_i, double a_i, double loss_i, double loss_j) {
        return production(x_i, p) + p.gamma * p.delta * loss_i - c_i - a_i -
               p.delta * x_i * loss_j;
    };

    return {consumption_stationarity(s.x1, s.lam1, s.lam2, loss2),
            consumption_stationarity(s.x2, s.lam2, s.lam1, loss1),
            flow_balance(s.x1, c1, a1, loss1, loss2),
            flow_balance(s.x2, c2, a2, loss2, loss1)};
}

std::array<double, 2> trivial_state_residuals(const ModelParams& p) {
    // Flow balance at the origin with zero controls; identically zero.
    const double r = production(0.0, p) + p.gamma * p.delta * loss_fraction(0.0, p.theta);
    return {r, r};
}

SteadyStateResult steady_state(const GameState& guess, const ModelParams& p,
                               const SteadyStateOptions& opt) {
    if (!(guess.x1 > 0.0 && guess.x2 > 0.0 && guess.lam1 > 0.0 && guess.lam2 > 0.0))
        throw std::invalid_argument("steady_state: guess components must be positive");

    Vec4 u{std::log(guess.x1), std::log(guess.x2), std::log(guess.lam1), std::log(guess.lam2)};
    auto eval = [&](const Vec4& uu) {
        const GameState s{0.0, std::exp(uu[0]), std::exp(uu[1]), std::exp(uu[2]), std::exp(uu[3])};
        return steady_state_residuals(s, p);
    };
    auto norm_inf4 = [](const Vec4& r) {
        return std::max(std::max(std::fabs(r[0]), std::fabs(r[1])),
                        std::max(std::fabs(r[2]), std::fabs(r[3])));
    };

    Vec4 R = eval(u);
    double rnorm = norm_inf4(R);

    SteadyStateResult res;
    auto record = [&](bool converged, const std::string& msg) {
        res.state = GameState{0.0, std::exp(u[0]), std::exp(u[1]), std::exp(u[2]), std::exp(u[3])};
        res.residuals = R;
        res.residual_norm = rnorm;
        res.converged = converged;
        res.interior = res.state.x1 > 1e-6 && res.state.x2 > 1e-6;
        res.message = msg;
        return res;
    };

    const double fd_h = 1e-7;
    for (int iter = 0; iter < opt.max_iter; ++iter) {
        if (rnorm < opt.tol) return record(true, "converged");

        std::array<Vec4, 4> Jcols;
        for (int j = 0; j < 4; ++j) {
            Vec4 uj = u;
            uj[j] += fd_h;
            const Vec4 Rj = eval(uj);
            for (int r = 0; r < 4; ++r) Jcols[j][r] = (Rj[r] - R[r]) / fd_h;
        }
        std::array<std::array<double, 4>, 4> J{};
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) J[r][c] = Jcols[c][r];

        Vec4 step{};
        if (!solve_linear<4>(J, {-R[0], -R[1], -R[2], -R[3]}, step))
            return record(false, "singular Jacobian in the stationarity system");

        double smax = 0.0;
        for (double v : step) smax = std::max(smax, std::fabs(v));
        if (smax > 2.0)
            for (double& v : step) v *= 2.0 / smax;

        double alpha = 1.0;
        bool improved = false;
        for (int ls = 0; ls < 15; ++ls) {
            Vec4 u_new{u[0] + alpha * step[0], u[1] + alpha * step[1], u[2] + alpha * step[2],
                       u[3] + alpha * step[3]};
            bool in_range = true;
            for (double v : u_new)
                if (std::fabs(v) > 60.0) in_range = false;
            if (in_range) {
                const Vec4 R_new = eval(u_new);
                const double rn = norm_inf4(R_new);
                if (rn < rnorm) {
                    u = u_new;
                    R = R_new;
                    rnorm = rn;
                    improved = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        res.iterations = iter + 1;
        if (!improved) return record(false, "damping stalled; best residual " + std::to_string(rnorm));
    }
    return record(rnorm < opt.tol, rnorm < opt.tol
                                       ? "converged"
                                       : "no convergence after " + std::to_string(opt.max_iter) +
                                             " iterations");
}

} // namespace appgame

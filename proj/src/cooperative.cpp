#include "appgame/cooperative.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "appgame/model.hpp"

namespace appgame {

namespace {

double site_output(double weight, double x, const ModelParams& p) {
    if (weight <= 0.0) return 0.0;
    return production(weight * x, p);
}

double site_marginal(double weight, double x, const ModelParams& p) {
    if (weight <= 0.0) return 0.0;
    return weight * marginal_product(weight * x, p);
}

} // namespace

double coop_output(double x, const ModelParams& p) {
    if (x < 0.0) throw std::domain_error("coop_output: pooled stock must be nonnegative");
    return site_output(p.pi_weight, x, p) + site_output(1.0 - p.pi_weight, x, p);
}

double coop_marginal_output(double x, const ModelParams& p) {
    if (!(x > 0.0)) throw std::domain_error("coop_marginal_output: pooled stock must be positive");
    return site_marginal(p.pi_weight, x, p) + site_marginal(1.0 - p.pi_weight, x, p);
}

std::optional<double> coop_golden_rule(const ModelParams& p) {
    if (p.tech_mu <= 0.0 || p.tech_alpha >= 1.0 || p.tech_A <= 0.0) return std::nullopt;
    const double pi = p.pi_weight;
    const double share_factor = std::pow(pi, p.tech_alpha) + std::pow(1.0 - pi, p.tech_alpha);
    return std::pow(p.tech_A * p.tech_alpha * share_factor / p.tech_mu,
                    1.0 / (1.0 - p.tech_alpha));
}

CoopRates coop_rhs(const CoopState& s, const ModelParams& p) {
    if (!(s.x > 0.0)) throw StateCollapse(0, 'x', s.t, "cooperative stock exhausted");
    if (!(s.lam > 0.0)) throw StateCollapse(0, 'l', s.t, "cooperative shadow price vanished");
    const double c = inverse_marginal_utility(s.lam, p);
    return CoopRates{coop_output(s.x, p) - c, -s.lam * coop_marginal_output(s.x, p)};
}

CoopState CoopTrajectory::at(double t) const {
    if (segs_.empty()) return CoopState{t0_, x0_, lam_init_};
    t = std::clamp(t, t0_, te_);
    std::size_t lo = 0, hi = segs_.size() - 1;
    while (lo < hi) {
        const std::size_t mid = (lo + hi + 1) / 2;
        if (segs_[mid].t0 <= t)
            lo = mid;
        else
            hi = mid - 1;
    }
    const auto y = segs_[lo].eval(t);
    return CoopState{t, y[0], y[1]};
}

struct CoopIntegrator {
    const ModelParams& p;
    const IntegrateOptions& opt;

    CoopTrajectory run(double x0, double lam0) const {
        struct Rhs {
            const ModelParams* p;
            void operator()(double t, const std::array<double, 2>& y,
                            std::array<double, 2>& dy) const {
                const CoopRates r = coop_rhs(CoopState{t, y[0], y[1]}, *p);
                dy = {r.dx, r.dlam};
            }
        };

        CoopTrajectory traj;
        traj.t0_ = 0.0;
        traj.x0_ = x0;
        traj.lam_init_ = lam0;
        traj.lam0 = lam0;
        const double T = p.horizon_T;

        StepControl ctrl;
        ctrl.rel_tol = opt.rel_tol;
        ctrl.abs_tol = opt.abs_tol;
        ctrl.fixed_step = opt.fixed_step;
        ctrl.max_steps = opt.max_steps;

        Rhs rhs{&p};
        Dopri5<2, Rhs&> stepper(rhs, ctrl);
        std::array<double, 2> y{x0, lam0};
        stepper.initialize(0.0, y);

        bool done = false;
        while (!done && stepper.time() < T) {
            DenseSegment<2> seg;
            const auto outcome = stepper.step(T, seg);
            if (outcome == Dopri5<2, Rhs&>::Outcome::DomainBlocked) {
                traj.collapsed_ = true;
                traj.te_ = stepper.time();
                done = true;
                break;
            }
            // stock or price crossing zero ends the solve
            double t_hit = std::numeric_limits<double>::infinity();
            for (int c = 0; c < 2; ++c) {
                double t_prev = seg.t0;
                double v_prev = seg.eval(t_prev)[c];
                for (int j = 1; j <= 8; ++j) {
                    const double tj = seg.t0 + (seg.t_end - seg.t0) * j / 8;
                    const double vj = seg.eval(tj)[c];
                    if (v_prev > 0.0 && vj <= 0.0) {
                        double a = t_prev, b = tj;
                        while (b - a > opt.event_time_tol) {
                            const double m = 0.5 * (a + b);
                            if (seg.eval(m)[c] > 0.0)
                                a = m;
                            else
                                b = m;
                        }
                        t_hit = std::min(t_hit, b);
                        break;
                    }
                    t_prev = tj;
                    v_prev = vj;
                }
            }
            if (std::isfinite(t_hit)) {
                seg.t_end = t_hit;
                traj.segs_.push_back(seg);
                // exhaustion at the horizon itself is the boundary condition
                traj.collapsed_ = t_hit < T - 1e-9 * std::max(1.0, T);
                traj.te_ = t_hit;
                done = true;
            } else {
                traj.segs_.push_back(seg);
            }
        }
        if (!done) traj.te_ = stepper.time();
        const auto& st = stepper.stats();
        traj.stats = SolverStats{st.accepted, st.rejected, st.rhs_evals, st.last_step};
        assemble(traj);
        return traj;
    }

    void assemble(CoopTrajectory& traj) const {
        std::vector<double> times;
        const double t0 = traj.t0_, te = traj.te_;
        const int n = opt.sample_count;
        if (te <= t0)
            times.push_back(t0);
        else if (n >= 2)
            for (int k = 0; k < n; ++k) times.push_back(t0 + (te - t0) * k / (n - 1));
        else
            times = {t0, te};
        traj.samples.reserve(times.size());
        for (double t : times) {
            CoopState s = traj.at(t);
            s.x = std::max(s.x, 0.0);
            const double lam = std::max(s.lam, 1e-300);
            traj.samples.push_back(CoopSample{t, s.x, s.lam, inverse_marginal_utility(lam, p)});
        }
    }
};

CoopTrajectory coop_solve(double x0, const ModelParams& p, const ShootOptions& opt,
                          std::optional<double> guess) {
    if (!(x0 > 0.0)) throw std::invalid_argument("coop_solve: initial stock must be positive");

    IntegrateOptions inner = opt.integ;
    inner.sample_count = 0;
    const CoopIntegrator integrator{p, inner};

    auto defect = [&](double z) {
        const double lam0 = std::exp(z);
        const CoopTrajectory tr = integrator.run(x0, lam0);
        const double T = p.horizon_T;
        if (opt.mode == TerminalMode::ExhaustWealth) {
            if (!tr.collapsed()) return tr.at(T).x / x0;
            const double tc = tr.t_end();
            const CoopState s = tr.at(tc);
            const double lam = std::max(s.lam, 1e-300);
            const double dx = coop_output(std::max(s.x, 0.0), p) - inverse_marginal_utility(lam, p);
            return (std::max(s.x, 0.0) + (T - tc) * dx) / x0;
        }
        const double eps = opt.eps_terminal;
        if (!tr.collapsed()) return (tr.at(T).lam - eps) / (1.0 + eps);
        return (tr.at(tr.t_end()).lam - eps) / (1.0 + eps) - (T - tr.t_end());
    };

    const double g = guess.value_or(marginal_utility(x0 / p.horizon_T, p));
    double z0 = std::log(g);
    double f0 = defect(z0);
    int evals = 1;

    // The defect increases in lam(0): a dearer unit of wealth means thriftier
    // consumption and more terminal stock. Secant steps inside a maintained
    // bracket, bisection whenever the step misbehaves.
    double z_lo = std::numeric_limits<double>::quiet_NaN(); // F < 0
    double z_hi = std::numeric_limits<double>::quiet_NaN(); // F > 0
    auto note = [&](double z, double f) {
        if (f < 0.0 && (!std::isfinite(z_lo) || z > z_lo)) z_lo = z;
        if (f > 0.0 && (!std::isfinite(z_hi) || z < z_hi)) z_hi = z;
    };
    note(z0, f0);

    double z1 = z0 + (f0 < 0.0 ? 0.5 : -0.5);
    double f1 = std::fabs(f0) < opt.tol ? f0 : defect(z1);
    if (std::fabs(f0) < opt.tol) z1 = z0;
    evals += 1;
    note(z1, f1);

    int iter = 0;
    while (std::fabs(f1) >= opt.tol && iter < 240) {
        ++iter;
        double z2;
        if (f1 != f0) {
            z2 = z1 - f1 * (z1 - z0) / (f1 - f0);
        } else {
            z2 = z1 + (f1 < 0.0 ? 0.5 : -0.5);
        }
        if (std::isfinite(z_lo) && std::isfinite(z_hi)) {
            if (!(z2 > std::min(z_lo, z_hi) && z2 < std::max(z_lo, z_hi)))
                z2 = 0.5 * (z_lo + z_hi);
        } else if (!std::isfinite(z2) || std::fabs(z2 - z1) > 2.0) {
            z2 = z1 + (z2 > z1 ? 2.0 : -2.0);
        }
        z2 = std::clamp(z2, -60.0, 60.0);
        const double f2 = defect(z2);
        evals += 1;
        note(z2, f2);
        z0 = z1;
        f0 = f1;
        z1 = z2;
        f1 = f2;
    }

    IntegrateOptions outer = opt.integ;
    CoopTrajectory traj = CoopIntegrator{p, outer}.run(x0, std::exp(z1));
    traj.residual = {f1};
    traj.converged = std::fabs(f1) < opt.tol;
    traj.iterations = iter;
    (void)evals;
    return traj;
}

PhaseSigns phase_classify(double x, double c, const ModelParams& p) {
    if (!(x > 0.0)) throw std::domain_error("phase_classify: stock must be positive");
    if (!(c > 0.0)) throw std::domain_error("phase_classify: consumption must be positive");
    auto sgn = [](double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); };
    PhaseSigns out;
    out.c_growth_sign = sgn(coop_marginal_output(x, p));
    out.x_growth_sign = sgn(coop_output(x, p) - c);
    out.golden_rule = coop_golden_rule(p);
    if (!out.golden_rule) {
        out.region = GoldenRuleRegion::None;
    } else {
        const double xbar = *out.golden_rule;
        if (std::fabs(x - xbar) <= 1e-12 * std::max(1.0, xbar))
            out.region = GoldenRuleRegion::At;
        else
            out.region = x < xbar ? GoldenRuleRegion::Below : GoldenRuleRegion::Above;
    }
    return out;
}

DisaggregatedPaths disaggregate(const CoopTrajectory& traj, double pi_weight) {
    if (!(pi_weight > 0.0 && pi_weight < 1.0))
        throw std::invalid_argument("disaggregate: pi_weight must lie in (0,1)");
    DisaggregatedPaths out;
    out.t.reserve(traj.samples.size());
    for (const auto& s : traj.samples) {
        out.t.push_back(s.t);
        out.x1.push_back(pi_weight * s.x);
        out.x2.push_back((1.0 - pi_weight) * s.x);
        out.c1.push_back(pi_weight * s.c);
        out.c2.push_back((1.0 - pi_weight) * s.c);
    }
    return out;
}

} // namespace appgame

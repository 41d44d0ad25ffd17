#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "appgame/errors.hpp"

namespace appgame {

struct StepControl {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();
    double initial_step = 0.0; // 0 = choose automatically
    double fixed_step = 0.0;   // > 0 disables adaptivity (convergence studies)
    std::size_t max_steps = 20'000'000;
};

struct StepStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evals = 0;
    double last_step = 0.0;
};

// One accepted step of the 4th-order interpolant. t_end <= t0 + h when the
// segment was truncated at an event.
template <int N>
struct DenseSegment {
    double t0 = 0.0;
    double h = 0.0;
    double t_end = 0.0;
    std::array<double, N> r1{}, r2{}, r3{}, r4{}, r5{};

    std::array<double, N> eval(double t) const {
        const double th = (t - t0) / h;
        const double th1 = 1.0 - th;
        std::array<double, N> y;
        for (int i = 0; i < N; ++i)
            y[i] = r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])));
        return y;
    }
};

// Explicit Dormand-Prince 5(4) pair with the classic quartic dense output.
// The RHS callable has signature void(double t, const std::array<double,N>& y,
// std::array<double,N>& dydt) and may throw StateCollapse to veto a stage
// evaluation outside the admissible domain; the step is then retried with half
// the step width.  Fully deterministic: fixed evaluation and reduction order.
template <int N, class RHS>
class Dopri5 {
  public:
    using State = std::array<double, N>;

    enum class Outcome {
        Step,          // one step accepted, segment filled
        DomainBlocked, // RHS vetoed every retry down to the minimum width
    };

    Dopri5(RHS rhs, StepControl ctrl) : rhs_(rhs), ctrl_(ctrl) {}

    void initialize(double t, const State& y) {
        t_ = t;
        y_ = y;
        eval(t_, y_, k1_);
        h_ = ctrl_.fixed_step > 0.0 ? ctrl_.fixed_step : ctrl_.initial_step;
        have_h_ = h_ > 0.0;
    }

    // restart after an event (recomputes the first stage at the new state)
    void reinitialize(double t, const State& y) {
        t_ = t;
        y_ = y;
        eval(t_, y_, k1_);
        if (ctrl_.fixed_step > 0.0) h_ = ctrl_.fixed_step;
        have_h_ = h_ > 0.0;
    }

    double time() const { return t_; }
    const State& state() const { return y_; }
    const StepStats& stats() const { return stats_; }

    // Advance one accepted step without crossing t_cap (t_cap > current time).
    Outcome step(double t_cap, DenseSegment<N>& seg) {
        if (!have_h_) {
            h_ = select_initial_step(t_cap);
            have_h_ = true;
        }
        const double floor_h = step_floor();
        bool rejected_before = false;

        while (true) {
            if (stats_.accepted + stats_.rejected >= ctrl_.max_steps)
                throw SolverFailure("integrator exceeded the step budget at t=" + std::to_string(t_));

            double h = std::min(h_, ctrl_.max_step);
            bool hit_cap = false;
            if (t_ + h >= t_cap) {
                h = t_cap - t_;
                hit_cap = true;
            }
            if (h <= floor_h && !hit_cap)
                throw SolverFailure("step size underflow at t=" + std::to_string(t_) +
                                    " (h=" + std::to_string(h) + "); system too stiff here");

            State y_new, err;
            std::array<State, 7> k;
            bool domain_ok = stages(h, y_new, err, k);
            if (!domain_ok) {
                // stage left the admissible domain; shrink and retry
                stats_.rejected += 1;
                if (h <= 4.0 * floor_h)
                    return Outcome::DomainBlocked;
                h_ = 0.5 * h;
                rejected_before = true;
                continue;
            }

            double err_norm = 0.0;
            if (ctrl_.fixed_step <= 0.0) {
                for (int i = 0; i < N; ++i) {
                    const double sc = ctrl_.abs_tol +
                                      ctrl_.rel_tol * std::max(std::fabs(y_[i]), std::fabs(y_new[i]));
                    const double e = err[i] / sc;
                    err_norm += e * e;
                }
                err_norm = std::sqrt(err_norm / N);
            }

            if (err_norm <= 1.0 || ctrl_.fixed_step > 0.0) {
                fill_segment(seg, h, y_new, k);
                t_ = hit_cap ? t_cap : t_ + h; // land on the cap exactly
                seg.t_end = t_;
                y_ = y_new;
                k1_ = k[6]; // FSAL
                stats_.accepted += 1;
                stats_.last_step = h;
                if (ctrl_.fixed_step <= 0.0) {
                    const double fac = err_norm > 0.0
                                           ? 0.9 * std::pow(err_norm, -0.2)
                                           : 5.0;
                    const double facmax = rejected_before ? 1.0 : 5.0;
                    h_ = h * std::min(facmax, std::max(0.2, fac));
                }
                return Outcome::Step;
            }

            stats_.rejected += 1;
            rejected_before = true;
            const double fac = 0.9 * std::pow(err_norm, -0.2);
            h_ = h * std::max(0.2, std::min(1.0, fac));
            if (h_ <= floor_h)
                throw SolverFailure("step size underflow at t=" + std::to_string(t_) +
                                    " under error control; local error will not reduce");
        }
    }

  private:
    void eval(double t, const State& y, State& dydt) {
        rhs_(t, y, dydt);
        stats_.rhs_evals += 1;
    }

    double step_floor() const {
        return 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(t_));
    }

    // Hairer's starting-step heuristic, with domain vetoes handled by shrinking.
    double select_initial_step(double t_cap) {
        const double span = t_cap - t_;
        double d0 = 0.0, d1 = 0.0;
        for (int i = 0; i < N; ++i) {
            const double sc = ctrl_.abs_tol + ctrl_.rel_tol * std::fabs(y_[i]);
            d0 += (y_[i] / sc) * (y_[i] / sc);
            d1 += (k1_[i] / sc) * (k1_[i] / sc);
        }
        d0 = std::sqrt(d0 / N);
        d1 = std::sqrt(d1 / N);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * span : 0.01 * d0 / d1;
        h0 = std::min(h0, span);

        for (int attempt = 0; attempt < 40; ++attempt) {
            State y1, f1;
            bool ok = true;
            for (int i = 0; i < N; ++i) y1[i] = y_[i] + h0 * k1_[i];
            try {
                eval(t_ + h0, y1, f1);
            } catch (const StateCollapse&) {
                ok = false;
            }
            if (ok) {
                double d2 = 0.0;
                for (int i = 0; i < N; ++i) {
                    const double sc = ctrl_.abs_tol + ctrl_.rel_tol * std::fabs(y_[i]);
                    const double e = (f1[i] - k1_[i]) / sc;
                    d2 += e * e;
                }
                d2 = std::sqrt(d2 / N) / h0;
                const double dm = std::max(d1, d2);
                double h1 = dm > 1e-15 ? std::pow(0.01 / dm, 0.2) : std::max(1e-6 * span, h0 * 1e-3);
                return std::min({100.0 * h0, h1, span, ctrl_.max_step});
            }
            h0 *= 0.5;
            if (h0 <= step_floor()) break;
        }
        return std::max(step_floor() * 64.0, 1e-9 * span);
    }

    bool stages(double h, State& y_new, State& err, std::array<State, 7>& k) {
        static constexpr double a21 = 1.0 / 5;
        static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                                a53 = 64448.0 / 6561, a54 = -212.0 / 729;
        static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                                a64 = 49.0 / 176, a65 = -5103.0 / 18656;
        static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                                a75 = -2187.0 / 6784, a76 = 11.0 / 84;
        static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
        static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                                e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

        State yt;
        k[0] = k1_;
        try {
            for (int i = 0; i < N; ++i) yt[i] = y_[i] + h * a21 * k[0][i];
            eval(t_ + c2 * h, yt, k[1]);
            for (int i = 0; i < N; ++i) yt[i] = y_[i] + h * (a31 * k[0][i] + a32 * k[1][i]);
            eval(t_ + c3 * h, yt, k[2]);
            for (int i = 0; i < N; ++i)
                yt[i] = y_[i] + h * (a41 * k[0][i] + a42 * k[1][i] + a43 * k[2][i]);
            eval(t_ + c4 * h, yt, k[3]);
            for (int i = 0; i < N; ++i)
                yt[i] = y_[i] + h * (a51 * k[0][i] + a52 * k[1][i] + a53 * k[2][i] + a54 * k[3][i]);
            eval(t_ + c5 * h, yt, k[4]);
            for (int i = 0; i < N; ++i)
                yt[i] = y_[i] + h * (a61 * k[0][i] + a62 * k[1][i] + a63 * k[2][i] +
                                     a64 * k[3][i] + a65 * k[4][i]);
            eval(t_ + h, yt, k[5]);
            for (int i = 0; i < N; ++i)
                y_new[i] = y_[i] + h * (a71 * k[0][i] + a73 * k[2][i] + a74 * k[3][i] +
                                        a75 * k[4][i] + a76 * k[5][i]);
            eval(t_ + h, y_new, k[6]);
        } catch (const StateCollapse&) {
            return false;
        }
        for (int i = 0; i < N; ++i) {
            if (!std::isfinite(y_new[i])) return false;
            err[i] = h * (e1 * k[0][i] + e3 * k[2][i] + e4 * k[3][i] + e5 * k[4][i] +
                          e6 * k[5][i] + e7 * k[6][i]);
        }
        return true;
    }

    void fill_segment(DenseSegment<N>& seg, double h, const State& y_new,
                      const std::array<State, 7>& k) {
        static constexpr double d1 = -12715105075.0 / 11282082432.0;
        static constexpr double d3 = 87487479700.0 / 32700410799.0;
        static constexpr double d4 = -10690763975.0 / 1880347072.0;
        static constexpr double d5 = 701980252875.0 / 199316789632.0;
        static constexpr double d6 = -1453857185.0 / 822651844.0;
        static constexpr double d7 = 69997945.0 / 29380423.0;
        seg.t0 = t_;
        seg.h = h;
        seg.t_end = t_ + h;
        for (int i = 0; i < N; ++i) {
            const double ydiff = y_new[i] - y_[i];
            const double bspl = h * k[0][i] - ydiff;
            seg.r1[i] = y_[i];
            seg.r2[i] = ydiff;
            seg.r3[i] = bspl;
            seg.r4[i] = ydiff - h * k[6][i] - bspl;
            seg.r5[i] = h * (d1 * k[0][i] + d3 * k[2][i] + d4 * k[3][i] + d5 * k[4][i] +
                             d6 * k[5][i] + d7 * k[6][i]);
        }
    }

    RHS rhs_;
    StepControl ctrl_;
    double t_ = 0.0;
    State y_{};
    State k1_{};
    double h_ = 0.0;
    bool have_h_ = false;
    StepStats stats_;
};

} // namespace appgame

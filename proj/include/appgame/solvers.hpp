#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "appgame/dopri5.hpp"
#include "appgame/dynamics.hpp"

namespace appgame {

enum class EventKind { MarginOn, MarginOff, Collapse };

struct Event {
    double t = 0.0;
    EventKind kind = EventKind::MarginOn;
    int player = 0;       // whose margin / whose state collapsed
    char component = ' '; // for Collapse: 'x' or 'l'
};

struct Sample {
    GameState state;
    ControlPair ctrl1, ctrl2;
    AccountingBreakdown acct;
};

struct SolverStats {
    std::size_t steps_accepted = 0;
    std::size_t steps_rejected = 0;
    std::size_t rhs_evals = 0;
    double last_step = 0.0;
};

class Trajectory {
  public:
    std::vector<Sample> samples;
    std::vector<Event> events;
    SolverStats stats;

    double t_begin() const { return t0_; }
    double t_end() const { return te_; }
    bool collapsed() const { return collapsed_; }
    int collapsed_player() const { return collapsed_player_; }

    // Dense-output state at t, clamped into [t_begin, t_end].
    GameState at(double t) const;

    const std::vector<DenseSegment<4>>& segments() const { return segs_; }
    const GameState& initial_state() const { return init_; }

  private:
    friend class GameIntegrator;
    GameState init_;
    double t0_ = 0.0, te_ = 0.0;
    bool collapsed_ = false;
    int collapsed_player_ = 0;
    std::vector<DenseSegment<4>> segs_;
};

struct IntegrateOptions {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double fixed_step = 0.0;      // > 0: constant step width, no adaptivity
    int sample_count = 201;       // uniform grid; event times are merged in
    double event_time_tol = 1e-10;
    bool switch_to_survivor = false; // continue the surviving player's Ramsey problem after a wealth collapse
    std::size_t max_steps = 20'000'000;
};

// Integrates the canonical system from `init` (time init.t) to params.horizon_T.
// Margin activations/deactivations are located by bisection on the dense output
// and recorded as events; the stepper restarts there so the control-law kink
// never sits inside a step. Wealth or price hitting zero ends the trajectory
// with a Collapse event (or switches to the survivor's single-agent problem).
Trajectory integrate(const GameState& init, const ModelParams& p,
                     const IntegrateOptions& opt = {});

enum class TerminalMode { ExhaustWealth, FreePrice };

struct ShootOptions {
    TerminalMode mode = TerminalMode::ExhaustWealth;
    double eps_terminal = 1e-6; // target shadow price in FreePrice mode
    double tol = 1e-8;          // on the normalized terminal defect, max-norm
    int max_iter = 60;
    IntegrateOptions integ = inner_defaults();

    static IntegrateOptions inner_defaults() {
        IntegrateOptions o;
        o.sample_count = 0; // endpoints only; the caller re-integrates for output
        return o;
    }
};

struct ShootingResult {
    double lam10 = 0.0, lam20 = 0.0;   // converged (or best) initial shadow prices
    std::array<double, 2> residual{};  // normalized terminal defects at lam0
    bool converged = false;
    int iterations = 0;
    std::size_t integrations = 0;
    std::string message;
};

// Single shooting on (lam1(0), lam2(0)) with Broyden updates, a backtracking
// line search and finite-difference Jacobian (re)starts. Wealth collapse inside
// an inner integration is penalized by extrapolating the wealth shortfall to T
// instead of aborting the iteration.
ShootingResult shoot(double x10, double x20, const ModelParams& p,
                     const ShootOptions& opt = {},
                     std::optional<std::array<double, 2>> guess = std::nullopt);

// Default initial guess used when none is supplied: u'(x_i0 / T).
std::array<double, 2> default_costate_guess(double x10, double x20, const ModelParams& p);

struct SteadyStateOptions {
    double tol = 1e-8; // max-norm of the four condition residuals
    int max_iter = 120;
};

struct SteadyStateResult {
    GameState state;                 // t = 0; root (or best point on failure)
    std::array<double, 4> residuals{};
    double residual_norm = 0.0;
    bool converged = false;
    bool interior = false; // all wealth components bounded away from zero
    int iterations = 0;
    std::string message;
};

// Stationarity residuals at a state: the consumption-stationarity condition
// and the flow-balance condition, one pair per player, with the closed-form
// controls substituted in. (Increasing, concave technology convention.)
std::array<double, 4> steady_state_residuals(const GameState& s, const ModelParams& p);

// Flow-balance residuals of the origin state (x = c = a = 0); identically zero.
std::array<double, 2> trivial_state_residuals(const ModelParams& p);

// Damped Newton (finite-difference Jacobian, log-space iterates) on
// steady_state_residuals from a positive guess.
SteadyStateResult steady_state(const GameState& guess, const ModelParams& p,
                               const SteadyStateOptions& opt = {});

} // namespace appgame

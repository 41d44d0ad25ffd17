#pragma once

#include <array>

#include "appgame/equilibrium.hpp"

namespace appgame {

struct StateRates {
    double dx1 = 0.0, dx2 = 0.0;
    double dlam1 = 0.0, dlam2 = 0.0;
};

struct AccountingBreakdown {
    double total_production = 0.0;
    double total_consumption = 0.0;
    double total_outlays = 0.0;
    double deadweight_loss = 0.0;
};

// Wealth equation of motion of a player holding x_i against an opponent
// holding x_j, at the given controls:
//   y(x_i) - c_i - a_i - delta x_i (1-p_j) + gamma delta x_j (1-p_i)
// with 1-p_k the loss fraction inflicted by outlay a_k.
double state_rate(double x_i, double x_j, double c_i, double a_i, double a_j,
                  const ModelParams& p);

// Euler equation for the own shadow price; equals -dH_i/dx_i at fixed controls:
//   lam_i [delta (1-p_j) - y'(x_i)] - lam_j delta gamma (1-p_j)
double costate_rate(double x_i, double lam_i, double lam_j, double a_j,
                    const ModelParams& p);

// Canonical system with the closed-form equilibrium controls substituted in.
// Throws StateCollapse naming the failed component when x_i <= 0 or lam_i <= 0.
StateRates canonical_rhs(const GameState& s, const ModelParams& p);

// Flow accounting at a state and arbitrary controls. The identity
//   dx1 + dx2 = production - consumption - outlays - deadweight
// holds exactly by construction.
AccountingBreakdown accounting(const GameState& s, const ControlPair& ctrl1,
                               const ControlPair& ctrl2, const ModelParams& p);

// Growth rates c_dot/c of both players' equilibrium consumption along the flow,
//   sigma(c_i) { y'(x_i) - delta (1-p_j) (lam_i - gamma lam_j)/lam_i },
// i.e. -sigma(c_i) lam_dot_i / lam_i, consistent with differentiating u'(c) = lam.
std::array<double, 2> consumption_growth(const GameState& s, const ModelParams& p);

} // namespace appgame

#pragma once

#include "appgame/params.hpp"

namespace appgame {

struct AggressionMargin {
    double margin = 0.0; // (gamma lam_i - lam_j)/lam_i - 1/(theta delta x_j)
    bool active = false; // margin > 0, strictly
};

// c*_i = u'^{-1}(lam_i)
double optimal_consumption(double lam_i, const ModelParams& p);

// Threshold condition for positive appropriation against an opponent holding x_j.
AggressionMargin aggression_margin(double x_j, double lam_i, double lam_j, const ModelParams& p);

// Closed-form best-response outlay (sqrt(theta delta x_j (gamma lam_i - lam_j)/lam_i) - 1)/theta,
// clamped to zero whenever the margin is inactive; x_j == 0 returns 0 without error.
// Evaluated through the margin itself so a* > 0 <=> margin > 0 holds exactly in
// floating point.
double optimal_appropriation(double x_j, double lam_i, double lam_j, const ModelParams& p);

// Both equilibrium controls of `player` (1 or 2) at state s.
ControlPair mne_controls(const GameState& s, int player, const ModelParams& p);

// Player's full Hamiltonian at arbitrary admissible controls.
double hamiltonian(const GameState& s, const ControlPair& own, const ControlPair& other,
                   int player, const ModelParams& p);

struct GridSpec {
    double c_lo = 0.0, c_hi = 0.0;
    int c_points = 0;
    double a_lo = 0.0, a_hi = 0.0;
    int a_points = 0;
};

// Verification oracle: coordinate grid scan of the Hamiltonian followed by
// golden-section refinement (bracket width 1e-10). Never consults the closed
// forms above. A grid-corner optimum at a == 0 is returned as exactly 0.
ControlPair brute_force_best_response(const GameState& s, int player, const ControlPair& other,
                                      const ModelParams& p, const GridSpec& grid);

} // namespace appgame

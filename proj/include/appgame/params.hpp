#pragma once

namespace appgame {

// Structural constants of the two-player production/appropriation economy.
struct ModelParams {
    double delta = 0.5;      // share of the wealth stock exposed to appropriation, in (0,1)
    double theta = 2.0;      // efficacy of appropriation outlays, > 1
    double gamma = 0.8;      // salvage ratio: fraction of the victim's loss the aggressor keeps, in (0,1)
    double horizon_T = 5.0;  // terminal time
    double eta = 2.0;        // CRRA curvature of felicity; eta == 1 selects log utility
    double tech_A = 1.0;     // production scale
    double tech_alpha = 0.5; // production curvature, in (0,1]
    double tech_mu = 0.0;    // linear drag on production; > 0 creates an interior golden-rule stock
    double pi_weight = 0.5;  // cooperative aggregation weight of player 1, in (0,1)

    // Admits alpha == 1 (linear technology) and tech_A == 0 (pure cake eating),
    // used by the analytic test oracles only.
    bool allow_nonconcave_tech = false;

    // Throws std::invalid_argument naming the offending field and its bound.
    void validate() const;
};

// Time plus the 4-vector of wealth stocks and own shadow prices.
struct GameState {
    double t = 0.0;
    double x1 = 0.0, x2 = 0.0;
    double lam1 = 0.0, lam2 = 0.0;

    double wealth(int player) const { return player == 1 ? x1 : x2; }
    double price(int player) const { return player == 1 ? lam1 : lam2; }
};

// Per-player instantaneous controls.
struct ControlPair {
    double c = 0.0; // consumption flow
    double a = 0.0; // appropriation outlay
};

} // namespace appgame

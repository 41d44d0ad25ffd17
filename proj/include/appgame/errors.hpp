#pragma once

#include <stdexcept>
#include <string>

namespace appgame {

// Signals that the canonical system was evaluated at (or driven to) a state
// with exhausted wealth or a vanished shadow price.
struct StateCollapse : std::runtime_error {
    int player;     // 1 or 2
    char component; // 'x' (wealth) or 'l' (shadow price)
    double t;

    StateCollapse(int player_, char component_, double t_, const std::string& what_)
        : std::runtime_error(what_), player(player_), component(component_), t(t_) {}
};

// Numerical failure with a human-readable diagnostic (step-size underflow,
// non-convergence after the iteration cap, singular Jacobian, ...).
struct SolverFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace appgame

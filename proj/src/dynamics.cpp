#include "appgame/dynamics.hpp"

#include <sstream>

#include "appgame/errors.hpp"
#include "appgame/model.hpp"

namespace appgame {

double state_rate(double x_i, double x_j, double c_i, double a_i, double a_j,
                  const ModelParams& p) {
    const double gi = loss_fraction(a_i, p.theta);
    const double gj = loss_fraction(a_j, p.theta);
    return production(x_i, p) - c_i - a_i - p.delta * x_i * gj + p.gamma * p.delta * x_j * gi;
}

double costate_rate(double x_i, double lam_i, double lam_j, double a_j,
                    const ModelParams& p) {
    if (!(x_i > 0.0)) throw StateCollapse(0, 'x', 0.0, "costate_rate: wealth exhausted");
    const double gj = loss_fraction(a_j, p.theta);
    return lam_i * (p.delta * gj - marginal_product(x_i, p)) - lam_j * p.delta * p.gamma * gj;
}

namespace {

void check_admissible(const GameState& s) {
    auto bad = [&](int player, char component, const char* what) {
        std::ostringstream msg;
        msg << "state collapse: " << what << " of player " << player << " at t=" << s.t;
        throw StateCollapse(player, component, s.t, msg.str());
    };
    if (!(s.x1 > 0.0)) bad(1, 'x', "wealth");
    if (!(s.x2 > 0.0)) bad(2, 'x', "wealth");
    if (!(s.lam1 > 0.0)) bad(1, 'l', "shadow price");
    if (!(s.lam2 > 0.0)) bad(2, 'l', "shadow price");
}

} // namespace

StateRates canonical_rhs(const GameState& s, const ModelParams& p) {
    check_admissible(s);
    const ControlPair u1 = mne_controls(s, 1, p);
    const ControlPair u2 = mne_controls(s, 2, p);
    StateRates r;
    r.dx1 = state_rate(s.x1, s.x2, u1.c, u1.a, u2.a, p);
    r.dx2 = state_rate(s.x2, s.x1, u2.c, u2.a, u1.a, p);
    r.dlam1 = costate_rate(s.x1, s.lam1, s.lam2, u2.a, p);
    r.dlam2 = costate_rate(s.x2, s.lam2, s.lam1, u1.a, p);
    return r;
}

AccountingBreakdown accounting(const GameState& s, const ControlPair& ctrl1,
                               const ControlPair& ctrl2, const ModelParams& p) {
    AccountingBreakdown b;
    b.total_production = production(s.x1, p) + production(s.x2, p);
    b.total_consumption = ctrl1.c + ctrl2.c;
    b.total_outlays = ctrl1.a + ctrl2.a;
    const double g1 = loss_fraction(ctrl1.a, p.theta);
    const double g2 = loss_fraction(ctrl2.a, p.theta);
    b.deadweight_loss =
        (1.0 - p.gamma) * (p.delta * s.x1 * g2 + p.delta * s.x2 * g1);
    return b;
}

std::array<double, 2> consumption_growth(const GameState& s, const ModelParams& p) {
    check_admissible(s);
    const double a1 = optimal_appropriation(s.x2, s.lam1, s.lam2, p);
    const double a2 = optimal_appropriation(s.x1, s.lam2, s.lam1, p);
    auto one = [&](double x_i, double lam_i, double lam_j, double a_j) {
        const double sigma = 1.0 / p.eta;
        const double gj = loss_fraction(a_j, p.theta);
        return sigma * (marginal_product(x_i, p) -
                        p.delta * gj * (lam_i - p.gamma * lam_j) / lam_i);
    };
    return {one(s.x1, s.lam1, s.lam2, a2), one(s.x2, s.lam2, s.lam1, a1)};
}

} // namespace appgame

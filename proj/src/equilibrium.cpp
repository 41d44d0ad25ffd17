#include "appgame/equilibrium.hpp"

#include <cmath>
#include <stdexcept>

#include "appgame/model.hpp"

namespace appgame {

double optimal_consumption(double lam_i, const ModelParams& p) {
    if (!(lam_i > 0.0)) throw std::domain_error("optimal_consumption: shadow price must be positive");
    return inverse_marginal_utility(lam_i, p);
}

AggressionMargin aggression_margin(double x_j, double lam_i, double lam_j, const ModelParams& p) {
    if (!(x_j > 0.0)) throw std::domain_error("aggression_margin: opponent wealth must be positive");
    if (!(lam_i > 0.0)) throw std::domain_error("aggression_margin: own shadow price must be positive");
    const double m = (p.gamma * lam_i - lam_j) / lam_i - 1.0 / (p.theta * p.delta * x_j);
    return AggressionMargin{m, m > 0.0};
}

double optimal_appropriation(double x_j, double lam_i, double lam_j, const ModelParams& p) {
    if (!(lam_i > 0.0)) throw std::domain_error("optimal_appropriation: own shadow price must be positive");
    if (x_j < 0.0) throw std::domain_error("optimal_appropriation: opponent wealth must be nonnegative");
    if (x_j == 0.0) return 0.0; // nothing to grab
    if (p.gamma * lam_i <= lam_j) return 0.0;
    const AggressionMargin m = aggression_margin(x_j, lam_i, lam_j, p);
    if (!m.active) return 0.0;
    // With q = theta delta x_j * margin, the interior root (sqrt(1+q)-1)/theta
    // rewritten as q/(theta (sqrt(1+q)+1)) stays strictly positive for every
    // positive margin, so the threshold equivalence is exact in floating point.
    const double q = p.theta * p.delta * x_j * m.margin;
    return q / (p.theta * (std::sqrt(1.0 + q) + 1.0));
}

ControlPair mne_controls(const GameState& s, int player, const ModelParams& p) {
    const int other = player == 1 ? 2 : 1;
    ControlPair out;
    out.c = optimal_consumption(s.price(player), p);
    out.a = optimal_appropriation(s.wealth(other), s.price(player), s.price(other), p);
    return out;
}

double hamiltonian(const GameState& s, const ControlPair& own, const ControlPair& other,
                   int player, const ModelParams& p) {
    const int j = player == 1 ? 2 : 1;
    const double x_i = s.wealth(player), x_j = s.wealth(j);
    const double lam_i = s.price(player), lam_j = s.price(j);
    if (!(lam_i > 0.0)) throw std::domain_error("hamiltonian: own shadow price must be positive");
    const double gi = loss_fraction(own.a, p.theta);   // inflicted on j by own outlay
    const double gj = loss_fraction(other.a, p.theta); // inflicted on i by the opponent
    const double own_motion = production(x_i, p) - own.c - own.a -
                              p.delta * x_i * gj + p.gamma * p.delta * x_j * gi;
    const double cross_motion = production(x_j, p) - other.c - other.a -
                                p.delta * x_j * gi + p.gamma * p.delta * x_i * gj;
    return felicity(own.c, p) + lam_i * own_motion + lam_j * cross_motion;
}

namespace {

// Golden-section maximization of f on [lo, hi] down to an absolute bracket width.
template <class F>
double golden_max(F&& f, double lo, double hi, double bracket_width) {
    constexpr double invphi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > bracket_width) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

} // namespace

ControlPair brute_force_best_response(const GameState& s, int player, const ControlPair& other,
                                      const ModelParams& p, const GridSpec& grid) {
    if (grid.c_points < 2 || grid.a_points < 2 || !(grid.c_hi > grid.c_lo) ||
        !(grid.a_hi >= grid.a_lo) || !(grid.c_lo > 0.0) || grid.a_lo < 0.0)
        throw std::invalid_argument("brute_force_best_response: empty or invalid grid");

    const double bracket = 1e-10;
    auto H = [&](double c, double a) {
        return hamiltonian(s, ControlPair{c, a}, other, player, p);
    };

    // Scan a grid along one coordinate, then golden-section the bracket around
    // the best grid point; keep the grid point (exactly) unless the refined
    // value is strictly better.
    auto line_max = [&](auto&& f, double lo, double hi, int points) {
        double best_x = lo, best_v = f(lo);
        int best_k = 0;
        for (int k = 1; k < points; ++k) {
            const double x = lo + (hi - lo) * k / (points - 1);
            const double v = f(x);
            if (v > best_v) {
                best_v = v;
                best_x = x;
                best_k = k;
            }
        }
        const double step = (hi - lo) / (points - 1);
        const double blo = best_k == 0 ? lo : best_x - step;
        const double bhi = best_k == points - 1 ? hi : best_x + step;
        const double refined = golden_max(f, blo, bhi, bracket);
        return f(refined) > best_v ? refined : best_x;
    };

    // The Hamiltonian is additively separable in (c, a), so one scan per
    // coordinate locates the joint optimum.
    const double best_c =
        line_max([&](double c) { return H(c, grid.a_lo); }, grid.c_lo, grid.c_hi, grid.c_points);
    const double best_a =
        line_max([&](double a) { return H(best_c, a); }, grid.a_lo, grid.a_hi, grid.a_points);

    return ControlPair{best_c, best_a};
}

} // namespace appgame

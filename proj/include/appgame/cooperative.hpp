#pragma once

#include <optional>
#include <vector>

#include "appgame/dopri5.hpp"
#include "appgame/solvers.hpp"

namespace appgame {

struct CoopState {
    double t = 0.0;
    double x = 0.0;   // pooled wealth stock
    double lam = 0.0; // its shadow price
};

struct CoopRates {
    double dx = 0.0, dlam = 0.0;
};

// The cooperative agreement allocates the pooled stock in constant shares
// (pi, 1-pi) to the two production processes, so the economy's technology is
//   Y(x) = y(pi x) + y((1-pi) x).
// Collapses to y(x) for linear technology and, in per-player units at
// pi = 1/2, to the single-agent form.  pi = 1 or 0 gives the bare
// single-agent technology (used for the surviving-player problem).
double coop_output(double x, const ModelParams& p);
double coop_marginal_output(double x, const ModelParams& p);
std::optional<double> coop_golden_rule(const ModelParams& p);

// dx = Y(x) - c with c = u'^{-1}(lam); dlam = -lam Y'(x).
CoopRates coop_rhs(const CoopState& s, const ModelParams& p);

struct CoopSample {
    double t = 0.0, x = 0.0, lam = 0.0, c = 0.0;
};

class CoopTrajectory {
  public:
    std::vector<CoopSample> samples;
    SolverStats stats;
    double lam0 = 0.0;
    std::array<double, 1> residual{};
    bool converged = false;
    int iterations = 0;

    double t_begin() const { return t0_; }
    double t_end() const { return te_; }
    bool collapsed() const { return collapsed_; }
    CoopState at(double t) const;
    const std::vector<DenseSegment<2>>& segments() const { return segs_; }

  private:
    friend struct CoopIntegrator;
    double t0_ = 0.0, te_ = 0.0;
    double x0_ = 0.0, lam_init_ = 0.0;
    bool collapsed_ = false;
    std::vector<DenseSegment<2>> segs_;
};

// One-dimensional shooting on lam(0): safeguarded secant with bracket
// maintenance on the normalized terminal defect (x(T)/x0 or lam(T) - eps).
CoopTrajectory coop_solve(double x0, const ModelParams& p, const ShootOptions& opt = {},
                          std::optional<double> guess = std::nullopt);

enum class GoldenRuleRegion { Below, At, Above, None };

struct PhaseSigns {
    int c_growth_sign = 0; // sign of Y'(x)
    int x_growth_sign = 0; // sign of Y(x) - c
    GoldenRuleRegion region = GoldenRuleRegion::None;
    std::optional<double> golden_rule; // empty when Y' never vanishes
};

PhaseSigns phase_classify(double x, double c, const ModelParams& p);

struct DisaggregatedPaths {
    std::vector<double> t;
    std::vector<double> x1, x2; // share splits of the pooled stock
    std::vector<double> c1, c2; // share splits of pooled consumption; a == 0
};

DisaggregatedPaths disaggregate(const CoopTrajectory& traj, double pi_weight);

} // namespace appgame

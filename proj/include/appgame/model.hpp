#pragma once

#include <optional>

#include "appgame/params.hpp"

namespace appgame {

// CRRA felicity u(c) = (c^(1-eta) - 1)/(1-eta), log at eta == 1.
double felicity(double c, const ModelParams& p);

// u'(c) = c^(-eta)
double marginal_utility(double c, const ModelParams& p);

// u'^{-1}(lam) = lam^(-1/eta)
double inverse_marginal_utility(double lam, const ModelParams& p);

// -u'(c) / (c u''(c)); constant 1/eta under CRRA.
double elasticity_of_substitution(double c, const ModelParams& p);

// y(x) = A x^alpha - mu x
double production(double x, const ModelParams& p);

// y'(x) = A alpha x^(alpha-1) - mu; rejects x <= 0 when alpha < 1 (the
// marginal product diverges at the origin and the caller must treat that as
// state collapse, not as an infinite rate).
double marginal_product(double x, const ModelParams& p);

// Stock at which the marginal product vanishes, (A alpha / mu)^(1/(1-alpha)).
// Empty when mu == 0 or alpha == 1.
std::optional<double> golden_rule_stock(const ModelParams& p);

// Fraction of own wealth retained against an opponent outlay `a`: 1/(1 + theta a).
double retention_rate(double a, double theta);

// d retention / d a = -theta / (1 + theta a)^2
double retention_rate_derivative(double a, double theta);

// 1 - retention_rate(a): fraction of the exposed stock pried loose by outlay `a`.
double loss_fraction(double a, double theta);

} // namespace appgame

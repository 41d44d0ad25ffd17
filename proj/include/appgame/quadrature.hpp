#pragma once

#include <functional>

namespace appgame {

// Adaptive Gauss-Lobatto quadrature (4-point rule with a 7-point Kronrod
// refinement, bisecting where the two disagree). Deterministic.
double lobatto_integrate(const std::function<double(double)>& f, double a, double b,
                         double abs_tol);

} // namespace appgame

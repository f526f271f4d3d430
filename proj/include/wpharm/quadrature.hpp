#pragma once

#include <functional>

namespace wpharm {

// Adaptive Simpson integration of f over [a, b] to absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol, int max_depth = 40);

// The universal symmetric-geodesic constant
//   Cstar = \int_0^1 u^4 (1-u^6)^{-1/2} du,
// computed once by adaptive quadrature (after the substitution u^6 = sin^2
// theta the integrand is smooth) and cached.
double cstar();

// Psi1(t) = \int_t^{pi/2} sin(theta)^{2/3} dtheta, t in [0, pi/2].
// Tabulated with Hermite interpolation; the exact derivative -sin^{2/3}
// keeps the table error near rounding level.
double psi1(double t);

// Psi2(t) = \int_t^{pi/2} sin(theta)^{-4/3} dtheta, t in (0, pi/2].
// Evaluated through the split sin^{-4/3} = theta^{-4/3} + regular part, so
// the integrable endpoint blow-up is handled in closed form.
double psi2(double t);

} // namespace wpharm

#pragma once

// Independent oracles used by the unit and acceptance suites. These must
// not share implementation paths with the library code they validate.

#include <functional>
#include <vector>

namespace oracles {

// Cstar through the beta function: (1/6) B(5/6, 1/2), via lgamma.
double cstar_beta();

// Shortest path length between (rho1,phi1) and (rho2,phi2) on a dense
// (rho,phi) grid graph with a wide neighbor stencil, edge lengths computed
// by quadrature of the model metric along straight coordinate segments.
// Metrication error is about 1% with the default stencil.
double dijkstra_distance(double rho1, double phi1, double rho2, double phi2,
                         int grid_n = 220);

// Brute-force minimizer of f over a rectangle grid.
struct GridMin {
    double x = 0.0;
    double y = 0.0;
    double value = 0.0;
};
GridMin grid_minimize(const std::function<double(double, double)>& f,
                      double x0, double x1, double y0, double y1, int n);

} // namespace oracles

#pragma once

#include "wpharm/model_space.hpp"
#include "wpharm/solver.hpp"

#include <complex>

namespace wpharm {

// Plumbing parameter: complex t with 0 < |t| < 1, or t = 0 encoding the
// node itself.
struct PlumbingParam {
    std::complex<double> t;
};

// t = 0 maps to P0; otherwise (rho, phi) = (2 (-log|t|)^{-1/2}, arg(t)/8)
// with the argument lifted by branch_offset full turns.
ModelPoint plumbing_to_model(const PlumbingParam& t, int branch_offset = 0);

struct PlumbingResult {
    PlumbingParam t;
    bool multivalued = false; // |8 phi| exceeded the principal branch
};

// |t| = exp(-4 / rho^2), arg t = 8 phi (reduced to the principal branch,
// flagged when the lift wraps).
PlumbingResult model_to_plumbing(const ModelPoint& p);

// Product point of the stratum chart: regular coordinates in R^{2j} plus m
// singular factors.
struct ProductPoint {
    std::vector<double> regular;
    std::vector<ModelPoint> singular;
};

// sqrt(|dR|^2 + sum d(p_i, q_i)^2): the product distance with the flat
// stand-in for the stratum metric.
double product_distance(const ProductPoint& p, const ProductPoint& q);

} // namespace wpharm

#pragma once

#include "wpharm/domain.hpp"
#include "wpharm/glued_space.hpp"
#include "wpharm/model_space.hpp"

#include <limits>
#include <memory>
#include <optional>
#include <vector>

namespace wpharm {

// Target of a discrete map. Product targets carry a regular factor R^{2j}
// and m singular factors; model and glued targets are the m = 1, j = 0
// case; region targets constrain the single factor to H[rho0].
struct Target {
    enum class Kind { Model, Glued, Product, Region };
    Kind kind = Kind::Model;
    int j = 0;
    int m = 1;
    double rho0 = 0.0;
    std::optional<double> kappa; // product cross-term exponent
    double coupling = 0.5;       // cross-term magnitude

    int regular_dim() const { return 2 * j; }

    static Target model() { return {}; }
    static Target glued() { return {Kind::Glued, 0, 1, 0.0, {}, 0.5}; }
    static Target region(double rho0) {
        return {Kind::Region, 0, 1, rho0, {}, 0.5};
    }
    static Target product(int j, int m, std::optional<double> kappa = {}) {
        return {Kind::Product, j, m, 0.0, kappa, 0.5};
    }
};

// Per-vertex value: regular coordinates plus singular factors. Plain model
// targets store a single factor on sheet 0.
struct MapValue {
    std::vector<double> regular;
    std::vector<GluedPoint> singular;

    static MapValue model(const ModelPoint& p) {
        return {{}, {GluedPoint::on_sheet(0, p)}};
    }
    static MapValue model(double rho, double phi) {
        return model(ModelPoint::interior(rho, phi));
    }
    static MapValue basepoint() { return {{}, {GluedPoint::basepoint()}}; }
    static MapValue glued(const GluedPoint& g) { return {{}, {g}}; }

    const GluedPoint& factor() const { return singular.front(); }
};

// Product-metric distance between two values with matching shape.
double value_distance(const MapValue& a, const MapValue& b);

struct DiscreteMap {
    std::shared_ptr<const Mesh> mesh;
    Target target;
    std::vector<MapValue> values;
    std::vector<char> frozen; // boundary vertices

    std::size_t size() const { return values.size(); }
};

// Edge-based energy sum_edges w_ij d^2(u_i, u_j) with the target distance,
// including the optional product cross term.
double discrete_energy(const DiscreteMap& map);

struct Schedule {
    double tol = 1e-8;    // stop when the max vertex move drops below this
    int max_sweeps = 400;
    double damping = 0.5; // initial step fraction of the local mean update
    enum class Mode { Sequential, Parallel } mode = Mode::Sequential;
    int threads = 4;
    // interleave chart-linearized global solves between sweep blocks; only
    // states that strictly decrease the energy are adopted, so the sweep
    // semantics and monotonicity are unchanged
    bool accelerate = true;
};

struct SolveReport {
    int sweeps = 0;
    double final_energy = 0.0;
    std::vector<double> energy_history; // per sweep, non-increasing
    double max_move_last = 0.0;
    bool converged = false;
    std::vector<int> flagged_vertices; // local descent gave up there
    // discrete Euler-Lagrange residual of rho*Lap(rho) = 3 rho^6 |grad phi|^2
    // for single-factor targets, mean absolute value over safe vertices
    double el_residual = std::numeric_limits<double>::quiet_NaN();
};

// One local minimization of F(p) = sum_j w_j d^2(p, q_j) over the closed
// target: damped tangent-mean descent with backtracking for the interior
// candidate per sheet, compared against F(P0). Region targets project the
// result back into H[rho0].
MapValue frechet_update(const Target& target, const MapValue& current,
                        const std::vector<MapValue>& neighbors,
                        const std::vector<double>& weights,
                        double damping = 0.5, double tol = 1e-12,
                        bool* flagged = nullptr,
                        const ConvexRegion* region = nullptr);

// Nonlinear Gauss-Seidel sweeps of frechet_update over interior vertices.
// `boundary` must contain valid values at boundary vertices; interior
// entries are ignored (a chart-harmonic initial guess is built internally).
std::pair<DiscreteMap, SolveReport> solve_dirichlet(
    std::shared_ptr<const Mesh> mesh, const std::vector<MapValue>& boundary,
    const Target& target, const Schedule& schedule = {});

// Constrained version: boundary values are projected into H[rho0] first and
// every update is projected back, so the image stays in the region.
std::pair<DiscreteMap, SolveReport> solve_constrained(
    std::shared_ptr<const Mesh> mesh, const std::vector<MapValue>& boundary,
    const ConvexRegion& region, const Schedule& schedule = {});

// Harmonic replacement on the submesh B_radius(0): vertices outside stay
// frozen at the input, the inside is re-solved from the input's trace.
// sup_distance reports sup d(input, replacement) over the submesh.
std::pair<DiscreteMap, SolveReport> approximating_harmonic(
    const DiscreteMap& input, double radius, const Schedule& schedule = {},
    double* sup_distance = nullptr);

// Product solve; with kappa present the factors couple through the
// configured cross term with weight omega(rho) = min(1, rho^kappa).
std::pair<DiscreteMap, SolveReport> solve_product(
    std::shared_ptr<const Mesh> mesh, const std::vector<MapValue>& boundary,
    int j, int m, std::optional<double> kappa = {},
    const Schedule& schedule = {});

// Euler-Lagrange residual diagnostics for a solved single-factor map:
// mean |rho Lap rho - 3 rho^6 |grad phi|^2| over interior vertices with
// |x| <= radius whose whole stencil stays on one sheet.
double el_residual(const DiscreteMap& map, double radius = 0.7);

} // namespace wpharm

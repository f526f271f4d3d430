#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace wpharm {

// Domain metric: Euclidean, or a conformal perturbation e^{2 psi} with a
// recorded C^2 bound. In two dimensions the Dirichlet energy is conformally
// invariant, so the perturbation enters only through measures.
struct MetricSpec {
    std::function<double(double, double)> psi; // null = Euclidean
    double c2_bound = 0.0;

    bool euclidean() const { return !psi; }
};

struct Edge {
    int a;
    int b;
    double w;
};

class Mesh {
public:
    int dim = 2;
    double h = 0.0;
    std::vector<std::array<double, 3>> vertices;
    std::vector<std::array<int, 4>> cells; // triangles have cell[3] = -1
    std::vector<Edge> edges;
    std::vector<char> boundary;    // per-vertex flag
    std::vector<double> vertex_area; // lumped, includes conformal factor
    std::vector<double> psi;         // per-vertex log conformal factor
    double metric_c = 0.0;           // recorded C^2 bound of the perturbation
    int clamped_edges = 0;           // negative weights clamped to zero

    std::size_t n_vertices() const { return vertices.size(); }
    std::size_t n_cells() const { return cells.size(); }

    struct Neighbor {
        int vertex;
        double weight;
    };
    const std::vector<Neighbor>& neighbors(int v) const { return adj_[v]; }

    // total incident weight at a vertex
    double total_weight(int v) const;

    // locate the triangle containing (x, y); returns -1 if outside
    int locate(double x, double y) const;
    // barycentric weights of (x,y) in triangle t
    std::array<double, 3> barycentric(int t, double x, double y) const;
    // nearest vertex to (x, y)
    int nearest_vertex(double x, double y) const;

    double triangle_area(int t) const;
    // gradient of a piecewise-linear scalar on triangle t
    std::array<double, 2> triangle_gradient(int t,
                                            const std::vector<double>& f) const;
    // area-weighted per-vertex gradient average
    std::vector<std::array<double, 2>> vertex_gradients(
        const std::vector<double>& f) const;

    // fraction of triangle t inside the disk of radius r about center,
    // by recursive subdivision
    double triangle_disk_fraction(int t, std::array<double, 2> center,
                                  double r, int depth = 6) const;

    void finalize(); // builds adjacency, areas, locator grid

private:
    std::vector<std::vector<Neighbor>> adj_;
    // uniform grid point locator
    double grid_cell_ = 0.0;
    int grid_n_ = 0;
    std::vector<std::vector<int>> grid_;
};

// Quasi-uniform triangulation of the unit disk, deterministic for fixed h:
// concentric rings stitched by a two-pointer walk, cotangent edge weights
// clamped below at zero.
Mesh build_disk_mesh(double h, const MetricSpec& metric = {});

// Experimental n = 3 support: structured tetrahedral ball with linear
// element weights.
Mesh build_ball_mesh(double h, const MetricSpec& metric = {});

// Angularly uniform samples on the circle of radius r about `center`, with
// barycentric interpolation stencils into the mesh.
struct CircleTrace {
    double radius = 0.0;
    std::array<double, 2> center{0.0, 0.0};
    int samples = 0;
    std::vector<std::array<int, 3>> stencil_vertex;
    std::vector<std::array<double, 3>> stencil_weight;
    std::vector<double> measure_factor; // e^{psi} at each sample
};

CircleTrace circle_trace(const Mesh& mesh, double r, int samples);
CircleTrace circle_trace_at(const Mesh& mesh, std::array<double, 2> center,
                            double r, int samples);

// value of the piecewise-linear interpolant of f at trace sample k
double trace_value(const CircleTrace& trace, const std::vector<double>& f,
                   int k);

// trapezoidal rule times the circumference element r dtheta (with the
// conformal boundary measure when present)
double integrate_circle(const CircleTrace& trace,
                        const std::vector<double>& values);

// Discrete Dirichlet energy sum_edges w (f_i - f_j)^2 of a scalar field.
double scalar_dirichlet_energy(const Mesh& mesh, const std::vector<double>& f);

// Scalar harmonic extension: solves the cotangent-weight Laplace system for
// the interior values given boundary data, by Jacobi-preconditioned
// conjugate gradients. Used as the independent oracle for geodesic-line
// fixtures.
std::vector<double> scalar_harmonic(const Mesh& mesh,
                                    const std::vector<double>& boundary_values,
                                    double tol = 1e-13, int max_iter = 20000);

} // namespace wpharm

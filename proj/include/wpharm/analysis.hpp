#pragma once

#include "wpharm/solver.hpp"

#include <array>
#include <functional>
#include <memory>
#include <string>

namespace wpharm {

// ---------------------------------------------------------------------------
// Map sources: pointwise evaluation access used by the blow-up machinery.
// Discrete maps interpolate in the chart where the whole stencil stays on
// one sheet away from P0, falling back to the nearest vertex.
// ---------------------------------------------------------------------------

class MapSource {
public:
    virtual ~MapSource() = default;
    virtual GluedPoint at(double x, double y) const = 0;
};

class AnalyticMap final : public MapSource {
public:
    explicit AnalyticMap(std::function<GluedPoint(double, double)> f)
        : f_(std::move(f)) {}
    GluedPoint at(double x, double y) const override { return f_(x, y); }

private:
    std::function<GluedPoint(double, double)> f_;
};

class MeshMap final : public MapSource {
public:
    explicit MeshMap(const DiscreteMap& map, int factor = 0)
        : map_(&map), factor_(factor) {}
    GluedPoint at(double x, double y) const override;

private:
    const DiscreteMap* map_;
    int factor_;
};

// Materialize a source onto a mesh as a glued-target discrete map.
DiscreteMap discretize(std::shared_ptr<const Mesh> mesh, const MapSource& u);

// ---------------------------------------------------------------------------
// Energy profiles, order, epsilon-energy.
// ---------------------------------------------------------------------------

struct EnergyProfile {
    std::vector<double> radii;
    std::vector<double> E;            // Dirichlet energy over B_r
    std::vector<double> I;            // boundary integral of d^2(u, u(x0))
    std::vector<double> ratio_corr;   // e^{c r^2} r E / I
    std::vector<double> density_corr; // e^{c r^2} I / r^{n+1}
    double c = 0.0;
    bool degenerate = false;
    int resolution_warnings = 0;
    double mesh_h = 0.0;
};

// E(r) by per-cell clipping against B_r, I(r) by circle traces of the
// interpolated map.
EnergyProfile energy_profile(const DiscreteMap& map,
                             std::array<double, 2> x0,
                             const std::vector<double>& radii,
                             int samples = 720);

struct OrderResult {
    double alpha = 0.0;
    bool ok = false;
    std::string message;
};

// Extrapolates the corrected ratio to r -> 0 from the two smallest radii
// with r >= 5h (one Richardson step in r^2).
OrderResult order_at(const EnergyProfile& profile);

// As order_at but with the e^{C r} correction of the singular-factor
// monotonicity; also re-verifies the fitted-beta monotone quantities.
struct BetaResult {
    double beta = 0.0;
    bool ok = false;
    double monotonicity_defect = 0.0; // relative, of the refitted columns
    std::string message;
};
BetaResult beta_order(const EnergyProfile& profile, double C = 0.0);

struct EpsilonEnergy {
    double raw = 0.0;
    double normalized = 0.0; // raw / q_n, q_2 = pi
    bool resolution_warning = false;
};
EpsilonEnergy epsilon_energy(const DiscreteMap& map, std::array<double, 2> x,
                             double eps, int samples = 360);

// ---------------------------------------------------------------------------
// Blow-up sequences.
// ---------------------------------------------------------------------------

// lambda(sigma) = (sigma^{1-n} I(sigma))^{-1/2} on the chosen base map.
double lambda_factor(const MapSource& u, double sigma, int quad_samples = 720);

struct BlowupSequence {
    std::shared_ptr<const Mesh> mesh; // reference mesh of B_1(0)
    std::vector<double> sigmas;
    std::vector<double> lambdas;
    std::vector<double> shifts;       // applied phi-translations c_i
    // values[i][v]: rescaled map at sigma_i, mesh vertex v
    std::vector<std::vector<GluedPoint>> values;
    std::vector<double> I1;           // I^{u_sigma}(1), 1 by construction
    std::vector<double> lambda_half;  // lambda^{u_sigma}(1/2)
};

BlowupSequence blowup_sequence(const MapSource& u,
                               std::shared_ptr<const Mesh> mesh,
                               const std::vector<double>& sigmas,
                               int quad_samples = 720);

// Harmonic counterpart: per sigma, the rescaled boundary trace of u is
// solved as a Dirichlet problem, so the stored maps are discretely
// harmonic. This is the family the containment and comb experiments run
// on; the plain sequence keeps the raw rescalings.
BlowupSequence harmonic_blowup_sequence(const MapSource& u,
                                        std::shared_ptr<const Mesh> mesh,
                                        const std::vector<double>& sigmas,
                                        const Schedule& schedule = {},
                                        int quad_samples = 720);

// ---------------------------------------------------------------------------
// Tangent-map structure.
// ---------------------------------------------------------------------------

struct TangentStructure {
    int k = 0;                        // number of components
    std::vector<int> component;       // per vertex; -1 on the zero set
    std::vector<int> representative;  // per component: the argmax-f vertex
    std::vector<int> class_of;        // per component: its class in A
    int n_classes = 0;                // |A|
    std::vector<double> f;            // d_A(u(x), u(0)) per vertex
    double alpha = 0.0;               // from the radial log-log fit
    bool unstable = false;
    std::string message;
};

TangentStructure tangent_structure(const DiscreteMap& limit_map,
                                   double threshold, double delta_margin);

// angular measure of each component near the unit circle (for the
// first-eigenvalue relation lambda_1 = (pi/arc)^2 = alpha(alpha+n-2))
std::vector<double> component_arcs(const DiscreteMap& limit_map,
                                   const TangentStructure& structure);

struct PiecewiseReport {
    double max_within_defect = 0.0;    // |d - |f(x)-f(y)|| inside components
    double max_collinear_defect = 0.0; // geodesic-image collinearity
    double max_cross_defect = 0.0;     // |d - (f(x)+f(y))| across classes
    std::size_t offending_pairs = 0;
    double tolerance = 0.0;
};
PiecewiseReport piecewise_function_check(const DiscreteMap& limit_map,
                                         const TangentStructure& structure,
                                         double tolerance,
                                         int pairs_per_component = 400);

// Normalization by the phi-translation isometry T_{c_i}: after it, the
// extreme representatives satisfy phi(x_k) = -phi(x_1) for every sigma.
BlowupSequence normalize_blowup(const BlowupSequence& seq,
                                const TangentStructure& structure);

// Pullback distance matrices over a deterministic vertex subsample; with
// one level of geodesic-midpoint insertions when requested.
struct PullbackMatrices {
    std::vector<int> sample_vertices;
    std::vector<std::vector<std::vector<double>>> per_sigma;
    double max_cauchy_defect = 0.0; // max entry gap between successive sigma
};
PullbackMatrices pullback_matrix(const BlowupSequence& seq, int max_samples,
                                 bool midpoints = false);

// ---------------------------------------------------------------------------
// Comb approximation.
// ---------------------------------------------------------------------------

struct CombCurve {
    double sigma = 0.0;
    double rho_sigma = 0.0; // d(gamma_sigma(0), P0)
    double phi_bar = 0.0;   // half phi-spread of the extreme representatives
    std::vector<double> tooth_rho;
    std::vector<double> tooth_phi;
    double sup_pair_defect = 0.0;  // sup |d(L,L) - d(u_s, u_s)|
    double sup_point_defect = 0.0; // sup d(u_s, L)
    double sup_comb_defect = 0.0;  // sup_x d(u_s(x), comb)
    bool defined = true;
    std::string message;
};

std::vector<CombCurve> comb_construction(const BlowupSequence& normalized,
                                         const TangentStructure& structure,
                                         double restrict_radius = 0.875,
                                         int max_pair_samples = 240);

// ---------------------------------------------------------------------------
// Containment experiment and the constants ledger.
// ---------------------------------------------------------------------------

struct ContainmentParams {
    double sigma0 = 0.05;
    int k_max = 3;
    double mesh_h = 0.02;
    double R = 0.875;        // sup measured over B_R
    double r = 0.2;          // target scale of the decay bounds
    int rho0_comb_index = 0; // which sigma's comb base fixes the region
    double rho0_override = 0.0; // > 0: fix the region directly
    int quad_samples = 720;
    Schedule schedule;
};

struct ContainmentStep {
    double sigma = 0.0;
    double sup_distance = 0.0;     // sup_{B_R} d(u_k, H[rho0/2]), solved map
    double outside_measure = 0.0;  // m{x : u_k(x) not in H[rho0/2]}
    double decay_factor = 0.0;     // previous sup / this sup
    bool inclusion_ok = true;      // Lemma 3.5 inclusion at this sigma
    double gap_value = 0.0;        // gamma_gap(rho_sigma, r)
    bool gap_ok = true;            // gap > r/2 (Lemma 3.6)
    double rho_sigma = 0.0;
};

struct ContainmentReport {
    double rho0 = 0.0;
    double center_obstruction = 0.0; // d(u_k(0), H[rho0/2]) on the fixture
    std::vector<ContainmentStep> steps;
    // measured constants ledger
    double c1 = 0.0;
    double c2 = 0.0;
    double eps_admissible = 0.0; // from 16/3 c1 eps < 1/(4 c2^2)
    double eps_used = 0.0;
    bool truncated = false;
    std::string message;
};

ContainmentReport containment_experiment(const MapSource& base,
                                         const MapSource& limit,
                                         const ContainmentParams& params);

// discrete mean-value constant of a mesh, probed over a finite family of
// nonnegative subharmonic test functions
double probe_mean_value_constant(const Mesh& mesh);

// largest q such that the whole map image lies in H[q] (0 when some value
// is the basepoint or outside every region)
double tightest_region(const DiscreteMap& map, double restrict_radius);

// ---------------------------------------------------------------------------
// Built-in synthetic fixtures shared by tests, the verification harness and
// the command-line driver.
// ---------------------------------------------------------------------------

// Geodesic-line map u = (offset + slope x, 0).
AnalyticMap fixture_line_map(double offset = 2.0, double slope = 1.0);

// Exactly homogeneous two-sheet map: rho = a |x1|, phi = sign b |x|^{-2},
// P0 on the slit x1 = 0. A blow-up fixed point.
AnalyticMap fixture_two_sheet_homogeneous(double a = 1.0, double b = 0.35);

// The homogeneous profile with a zero-mean angular rho modulation that
// decays under blow-up and an optionally widening phi gap (exponent c2).
AnalyticMap fixture_two_sheet_perturbed(double a = 1.0, double b = 2.0,
                                        double c1 = 2.0, double c2 = 0.4);

// Defaults for the comb-trend family: harmonic_blowup_sequence over
// fixture_two_sheet_widening(1.0, 0.35, 0.5) has all three comb suprema
// decreasing across sigma halvings (the boundary trace has constant phi
// per sheet, so the solved maps flatten within sheets while the gap
// widens).

// Family with growing cross-sheet spread (phi ~ |x|^{-2-delta}): rho_sigma
// and the tooth anchors decrease toward zero across sigma halvings.
AnalyticMap fixture_two_sheet_widening(double a = 1.0, double b = 0.18,
                                       double delta = 0.8);

// Synthetic tangent map into the glued space: f = scale |x.e|^alpha on
// sheets split by sign(x.e).
AnalyticMap fixture_glued_tangent(double alpha = 1.0,
                                  std::array<double, 2> e = {1.0, 0.0},
                                  double scale_factor = 1.0);

// One-geodesic synthetic limit: k = 2 components, single class.
AnalyticMap fixture_folded_line(double slope = 1.0);

// Three angular sectors with sector-wise phi multipliers {-1, 0, +1} and
// growing cross-sector spread; gives k = 3, |A| = 3 and comb teeth from the
// middle sector.
AnalyticMap fixture_three_sector(double a = 1.0, double b = 0.18,
                                 double delta = 0.8);

// Its pullback limit in the glued space (sheet per sector).
AnalyticMap fixture_glued_three_sector(double scale_factor);

} // namespace wpharm

#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace wpharm {

// Thrown when a coordinate chart is requested at the basepoint P0, which no
// chart covers.
struct chart_error : std::domain_error {
    using std::domain_error::domain_error;
};

// A point of the completed model surface H-bar: either an interior point
// with standard coordinates (rho, phi), rho > 0, or the distinguished
// completion point P0. P0 is an atom, never a coordinate pair.
class ModelPoint {
public:
    static ModelPoint interior(double rho, double phi) {
        if (!(rho > 0.0))
            throw std::domain_error("ModelPoint: rho must be positive");
        return ModelPoint(rho, phi, false);
    }
    static ModelPoint basepoint() { return ModelPoint(0.0, 0.0, true); }

    bool is_basepoint() const { return basepoint_; }
    bool is_interior() const { return !basepoint_; }

    double rho() const {
        require_interior("rho");
        return rho_;
    }
    double phi() const {
        require_interior("phi");
        return phi_;
    }

    // d(p, P0): rho for interior points, 0 for P0 itself.
    double rho_or_zero() const { return basepoint_ ? 0.0 : rho_; }

private:
    ModelPoint(double r, double p, bool b) : rho_(r), phi_(p), basepoint_(b) {}
    void require_interior(const char* what) const {
        if (basepoint_)
            throw chart_error(std::string("ModelPoint::") + what +
                              ": undefined at P0");
    }
    double rho_;
    double phi_;
    bool basepoint_;
};

// Homogeneous coordinates (rho, Phi) with Phi = rho^3 phi. Interior only.
struct HomogeneousPoint {
    double rho;
    double Phi;
};

HomogeneousPoint to_homogeneous(const ModelPoint& p);
ModelPoint from_homogeneous(const HomogeneousPoint& h);

// Scaling map: (rho, Phi) -> (lambda rho, lambda Phi); P0 -> P0.
ModelPoint scale(double lambda, const ModelPoint& p);

enum class Chart { Standard, Homogeneous };

// Symmetric 2x2 metric tensor at an interior point, in the requested chart.
struct Metric2 {
    double g11;
    double g12;
    double g22;
};

Metric2 metric_at(const ModelPoint& p, Chart chart);

// Tangent vector at an interior point, components in standard coordinates.
struct TangentVector {
    double d_rho;
    double d_phi;
};

// |v|_g at p, p interior.
double tangent_norm(const ModelPoint& p, const TangentVector& v);

// ---------------------------------------------------------------------------
// Geodesics.
//
// Arclength-parameterized geodesics satisfy rho'^2 + rho^6 phi'^2 = 1 with
// first integral J = rho^6 phi' (the Clairaut constant). Along a geodesic,
// rho is convex with unique minimum rho_min = |J|^{1/3} when the path turns.
// Both the phi-advance and the arclength between radii reduce to closed-form
// incomplete integrals, evaluated through psi1/psi2.
// ---------------------------------------------------------------------------

struct GeodesicSample {
    double s;         // arclength
    double rho;
    double phi;
    double rho_prime; // d rho / ds, kept for the conservation diagnostics
};

struct GeodesicPath {
    std::vector<GeodesicSample> samples;
    double clairaut_J = 0.0;
    double step = 0.0;
    bool unit_speed = true;           // input direction had unit norm
    bool direction_normalized = false; // warning: direction was rescaled
    bool truncated_at_floor = false;  // integration halted at the rho floor

    double length() const {
        return samples.empty() ? 0.0 : samples.back().s - samples.front().s;
    }
    // max |rho'^2 + J^2/rho^6 - 1| over samples
    double max_unit_speed_defect() const;
    // max |rho^3 sqrt(1 - rho'^2) - |J|| over samples: the measured drift of
    // the first integral, equivalent to the unit-speed defect rescaled
    double max_clairaut_drift() const;
};

// Integrate the geodesic initial value problem with a classical 4th-order
// one-step method on the reduced system rho' = p, p' = 3 J^2 / rho^7,
// phi' = J / rho^6, J fixed by the initial data. Halts early (and flags the
// path) if rho falls below rho_floor.
GeodesicPath geodesic_ivp(const ModelPoint& start, const TangentVector& dir,
                          double length, double step,
                          double rho_floor = 1e-6);

enum class BvpStatus {
    Converged,
    NearBasepoint, // solved, but rho_min fell below the configured floor
    Unresolved     // shooting failed; length is the upper bound rho_p + rho_q
};

struct BvpResult {
    double length = 0.0;
    double clairaut_J = 0.0;  // signed: sign of (phi_q - phi_p)
    bool turning = false;     // path passes through rho_min = |J|^{1/3}
    double rho_min = 0.0;
    BvpStatus status = BvpStatus::Converged;
    int iterations = 0;
};

// Connecting geodesic data between two interior points by scalar shooting
// on the Clairaut constant. tol is the endpoint tolerance in d.
BvpResult solve_bvp(const ModelPoint& p, const ModelPoint& q,
                    double tol = 1e-12, double rho_floor = 1e-6);

struct BvpPath {
    GeodesicPath path;
    double length = 0.0;
    BvpStatus status = BvpStatus::Converged;
};

// As solve_bvp, but also integrates the sampled path from p to q.
BvpPath geodesic_bvp(const ModelPoint& p, const ModelPoint& q,
                     double tol = 1e-12, double step = 1e-3,
                     double rho_floor = 1e-6);

// Distance on H-bar. P0 handled in closed form, interior pairs by shooting.
double distance(const ModelPoint& p, const ModelPoint& q);

struct DistanceResult {
    double value = 0.0;
    BvpStatus status = BvpStatus::Converged;
};
DistanceResult distance_ex(const ModelPoint& p, const ModelPoint& q,
                           double tol = 1e-12, double rho_floor = 1e-6);

// Point at arclength fraction t in [0,1] along the geodesic from p to q.
ModelPoint geodesic_point(const ModelPoint& p, const ModelPoint& q, double t);

// log map: d(p,q) times the unit tangent at p of the geodesic toward q.
// p must be interior; q may be P0 (horizontal ray toward the basepoint).
TangentVector log_map(const ModelPoint& p, const ModelPoint& q);

// exp map: follow the geodesic from p with initial velocity v for arclength
// |v|_g. If the path reaches the basepoint within that arclength, the result
// is P0 (and the remainder is dropped).
ModelPoint exp_map(const ModelPoint& p, const TangentVector& v);

// ---------------------------------------------------------------------------
// Symmetric geodesics and the convex regions they bound.
// ---------------------------------------------------------------------------

struct SymmetricGeodesic {
    double rho0 = 0.0;         // gamma_rho(0)
    double phi_infinity = 0.0; // asymptote of gamma_phi, = cstar()/rho0^2
    GeodesicPath path;         // sampled over [-span, span]
};

// The unique symmetric geodesic through (rho0, 0); J = rho0^3.
SymmetricGeodesic symmetric_geodesic(double rho0, double span, double step);

// Analytic access to the curve Gamma_{rho0} (s >= 0 half-branch):
// phi as a function of rho >= rho0, its inverse, arclength, and the point at
// given arclength. All monotone closed-form reductions.
double symmetric_phi_at_rho(double rho0, double rho);
double symmetric_rho_at_phi(double rho0, double phi_abs);
double symmetric_arclength_at_rho(double rho0, double rho);
ModelPoint symmetric_point_at_arclength(double rho0, double s);

struct ContainResult {
    bool inside = false;
    bool borderline = false; // |phi| within tolerance of phi_infinity
};

// Closed convex region H[rho0]: the component of H minus Gamma_{rho0} away
// from P0, together with the curve itself.
class ConvexRegion {
public:
    explicit ConvexRegion(double rho0, double span = 0.0, double step = 1e-3);

    double rho0() const { return rho0_; }
    double phi_infinity() const { return phi_inf_; }
    const SymmetricGeodesic& generator() const { return generator_; }

    ContainResult contains(const ModelPoint& p,
                           double border_tol = 1e-9) const;
    // Nearest-point projection onto the region (identity inside).
    ModelPoint project(const ModelPoint& p) const;
    // d(p, H[rho0]) = d(p, project(p)).
    double distance_to(const ModelPoint& p) const;

private:
    double rho0_;
    double phi_inf_;
    SymmetricGeodesic generator_;
};

struct GapResult {
    double value = 0.0;
    ModelPoint arg_a = ModelPoint::basepoint(); // minimizer on Gamma_{rho0}
    ModelPoint arg_b = ModelPoint::basepoint(); // minimizer on the cut curve
    bool resolution_warning = false;
};

// Numerical estimate of d(Gamma_{rho0}, Gamma_{rho0/2} \ B_r(P0)) by
// two-curve sampling plus local refinement. Requires rho0 < r.
GapResult gamma_gap(double rho0, double r, int samples_per_curve = 160);

} // namespace wpharm

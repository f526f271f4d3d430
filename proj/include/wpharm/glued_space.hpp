#pragma once

#include "wpharm/model_space.hpp"

#include <vector>

namespace wpharm {

// A point of the glued space: finitely many copies of H-bar identified at
// the shared basepoint. Interior points carry a sheet label; P0 belongs to
// no sheet.
class GluedPoint {
public:
    static GluedPoint on_sheet(int sheet, const ModelPoint& p) {
        if (p.is_basepoint()) return basepoint();
        if (sheet < 0)
            throw std::domain_error("GluedPoint: sheet label must be >= 0");
        return GluedPoint(sheet, p);
    }
    static GluedPoint on_sheet(int sheet, double rho, double phi) {
        return on_sheet(sheet, ModelPoint::interior(rho, phi));
    }
    static GluedPoint basepoint() {
        return GluedPoint(-1, ModelPoint::basepoint());
    }

    bool is_basepoint() const { return point_.is_basepoint(); }
    int sheet() const { return sheet_; } // -1 at P0
    const ModelPoint& point() const { return point_; }

private:
    GluedPoint(int s, const ModelPoint& p) : sheet_(s), point_(p) {}
    int sheet_;
    ModelPoint point_;
};

// d_A: same sheet uses the model distance, distinct sheets add radial
// distances through the shared basepoint.
double distance_A(const GluedPoint& x, const GluedPoint& y);

struct GluedGeodesic {
    std::vector<GeodesicPath> legs; // one (same sheet) or two (through P0)
    std::vector<int> leg_sheets;
    bool crosses_basepoint = false;
    double length = 0.0;
    BvpStatus status = BvpStatus::Converged;
};

GluedGeodesic glued_geodesic(const GluedPoint& x, const GluedPoint& y,
                             double tol = 1e-12, double step = 1e-3);

// Point at arclength fraction t of the geodesic from x to y.
GluedPoint glued_geodesic_point(const GluedPoint& x, const GluedPoint& y,
                                double t);

struct QuadrupleReport {
    std::size_t count = 0;
    double max_violation = 0.0; // positive means the inequality failed
    std::size_t violations_beyond_tol = 0;
};

struct Quadruple {
    GluedPoint z;
    GluedPoint x;
    GluedPoint y;
    double lambda;
};

// Checks d^2(z, m) <= (1-l) d^2(z,x) + l d^2(z,y) - l(1-l) d^2(x,y) with m
// the point at parameter l on the geodesic from x to y.
QuadrupleReport npc_quadrilateral_check(const std::vector<Quadruple>& sample,
                                        double tol = 1e-6);

} // namespace wpharm

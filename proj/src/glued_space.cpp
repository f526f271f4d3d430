#include "wpharm/glued_space.hpp"

#include <cmath>

namespace wpharm {

double distance_A(const GluedPoint& x, const GluedPoint& y) {
    if (x.is_basepoint() && y.is_basepoint()) return 0.0;
    if (x.is_basepoint()) return y.point().rho();
    if (y.is_basepoint()) return x.point().rho();
    if (x.sheet() == y.sheet()) return distance(x.point(), y.point());
    return x.point().rho() + y.point().rho();
}

GluedGeodesic glued_geodesic(const GluedPoint& x, const GluedPoint& y,
                             double tol, double step) {
    GluedGeodesic out;
    auto horizontal_leg = [&](const ModelPoint& p) {
        // segment from p straight to the basepoint, phi frozen; sampled
        // exactly, the endpoint sample sits at rho = 0
        GeodesicPath leg;
        leg.step = step;
        leg.clairaut_J = 0.0;
        const double rho = p.rho();
        const long n = std::max(1L, static_cast<long>(std::ceil(rho / step)));
        for (long i = 0; i <= n; ++i) {
            const double s = std::min(rho, i * (rho / n));
            leg.samples.push_back({s, rho - s, p.phi(), -1.0});
        }
        return leg;
    };
    if (x.is_basepoint() || y.is_basepoint()) {
        out.crosses_basepoint = true;
        if (!x.is_basepoint()) {
            out.legs.push_back(horizontal_leg(x.point()));
            out.leg_sheets.push_back(x.sheet());
            out.length += x.point().rho();
        }
        if (!y.is_basepoint()) {
            out.legs.push_back(horizontal_leg(y.point()));
            out.leg_sheets.push_back(y.sheet());
            out.length += y.point().rho();
        }
        return out;
    }
    if (x.sheet() == y.sheet()) {
        const BvpPath bp = geodesic_bvp(x.point(), y.point(), tol, step);
        out.legs.push_back(bp.path);
        out.leg_sheets.push_back(x.sheet());
        out.length = bp.length;
        out.status = bp.status;
        return out;
    }
    out.crosses_basepoint = true;
    out.legs.push_back(horizontal_leg(x.point()));
    out.leg_sheets.push_back(x.sheet());
    out.legs.push_back(horizontal_leg(y.point()));
    out.leg_sheets.push_back(y.sheet());
    out.length = x.point().rho() + y.point().rho();
    return out;
}

GluedPoint glued_geodesic_point(const GluedPoint& x, const GluedPoint& y,
                                double t) {
    if (t <= 0.0) return x;
    if (t >= 1.0) return y;
    if (x.is_basepoint() && y.is_basepoint()) return x;
    if (x.is_basepoint()) {
        return GluedPoint::on_sheet(y.sheet(), t * y.point().rho(),
                                    y.point().phi());
    }
    if (y.is_basepoint()) {
        const double rho = (1.0 - t) * x.point().rho();
        if (rho <= 0.0) return GluedPoint::basepoint();
        return GluedPoint::on_sheet(x.sheet(), rho, x.point().phi());
    }
    if (x.sheet() == y.sheet()) {
        const ModelPoint m = geodesic_point(x.point(), y.point(), t);
        return GluedPoint::on_sheet(x.sheet(), m);
    }
    const double rx = x.point().rho(), ry = y.point().rho();
    const double s = t * (rx + ry);
    if (s < rx)
        return GluedPoint::on_sheet(x.sheet(), rx - s, x.point().phi());
    if (s > rx)
        return GluedPoint::on_sheet(y.sheet(), s - rx, y.point().phi());
    return GluedPoint::basepoint();
}

QuadrupleReport npc_quadrilateral_check(const std::vector<Quadruple>& sample,
                                        double tol) {
    QuadrupleReport out;
    out.count = sample.size();
    for (const auto& q : sample) {
        const double l = q.lambda;
        const GluedPoint m = glued_geodesic_point(q.x, q.y, l);
        const double dzm = distance_A(q.z, m);
        const double dzx = distance_A(q.z, q.x);
        const double dzy = distance_A(q.z, q.y);
        const double dxy = distance_A(q.x, q.y);
        const double rhs = (1.0 - l) * dzx * dzx + l * dzy * dzy -
                           l * (1.0 - l) * dxy * dxy;
        const double violation = dzm * dzm - rhs;
        out.max_violation = std::max(out.max_violation, violation);
        if (violation > tol) ++out.violations_beyond_tol;
    }
    return out;
}

} // namespace wpharm

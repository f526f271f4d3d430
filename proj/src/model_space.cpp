#include "wpharm/model_space.hpp"

#include "wpharm/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wpharm {

namespace {

// phi-advance along a geodesic with Clairaut constant J > 0, from the
// turning radius |J|^{1/3} out to rho. Substituting u = |J|^{1/3}/rho and
// u^6 = sin^2 theta reduces the integral to psi1.
double phi_advance(double rho, double J) {
    if (J <= 0.0) return 0.0;
    double x = J / (rho * rho * rho);
    x = std::clamp(x, 0.0, 1.0);
    const double theta0 = std::asin(x);
    return std::cbrt(1.0 / (J * J)) * psi1(theta0) / 3.0;
}

// arclength along the same stretch
double arc_advance(double rho, double J) {
    if (J <= 0.0) return rho;
    double x = J / (rho * rho * rho);
    x = std::clamp(x, 0.0, 1.0);
    if (x >= 1.0) return 0.0;
    const double theta0 = std::asin(x);
    return std::cbrt(J) * psi2(theta0) / 3.0;
}

// Brent root finder on [a,b] with f(a), f(b) of opposite sign.
template <typename F>
double brent(F f, double a, double b, double fa, double fb, double xtol,
             double ftol, int max_iter, int* iters_out = nullptr) {
    double c = b, fc = fb;
    double d = b - a, e = b - a;
    int it = 0;
    for (; it < max_iter; ++it) {
        if ((fb > 0.0 && fc > 0.0) || (fb < 0.0 && fc < 0.0)) {
            c = a;
            fc = fa;
            e = d = b - a;
        }
        if (std::fabs(fc) < std::fabs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() *
                                std::fabs(b) + 0.5 * xtol;
        const double xm = 0.5 * (c - b);
        if (std::fabs(xm) <= tol1 || fb == 0.0 || std::fabs(fb) < ftol) break;
        if (std::fabs(e) >= tol1 && std::fabs(fa) > std::fabs(fb)) {
            const double s = fb / fa;
            double p, q;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                const double qq = fa / fc, rr = fb / fc;
                p = s * (2.0 * xm * qq * (qq - rr) - (b - a) * (rr - 1.0));
                q = (qq - 1.0) * (rr - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::fabs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::fabs(tol1 * q),
                                   std::fabs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::fabs(d) > tol1) ? d : (xm > 0 ? tol1 : -tol1);
        fb = f(b);
    }
    if (iters_out) *iters_out = it;
    return b;
}

struct Shot {
    double J = 0.0;       // nonnegative
    bool turning = false;
    double length = 0.0;
    int iterations = 0;
    bool converged = true;
};

// One-parameter shooting on the Clairaut constant: find J such that the
// geodesic between radii r1, r2 advances phi by exactly dphi >= 0.
Shot shoot_clairaut(double r1, double r2, double dphi, double tol) {
    Shot out;
    if (dphi <= 0.0) {
        out.length = std::fabs(r2 - r1);
        return out;
    }
    const double rlo = std::min(r1, r2), rhi = std::max(r1, r2);
    const double jmax = rlo * rlo * rlo;
    const double dphi_star = phi_advance(rhi, jmax);
    // residual tolerance in phi units matched to the endpoint tolerance in d
    const double ftol =
        std::max(0.5 * tol / (rhi * rhi * rhi), 1e-15 * std::max(1.0, dphi));

    if (dphi >= dphi_star) {
        // path dips to the turning radius J^{1/3} <= rlo and comes back up
        out.turning = true;
        auto h = [&](double J) {
            return phi_advance(r1, J) + phi_advance(r2, J) - dphi;
        };
        double hi = jmax, fhi = dphi_star - dphi; // == h(jmax)
        if (std::fabs(fhi) <= ftol) {
            out.J = jmax;
            out.length = arc_advance(r1, jmax) + arc_advance(r2, jmax);
            return out;
        }
        // asymptotically 2 Cstar J^{-2/3} = dphi
        double lo = std::pow(2.0 * cstar() / dphi, 1.5);
        lo = std::min(lo, 0.5 * hi);
        double flo = h(lo);
        int expand = 0;
        while (flo < 0.0 && expand++ < 800) {
            lo *= 0.25;
            if (lo < 1e-300) break;
            flo = h(lo);
        }
        if (flo < 0.0) {
            out.converged = false;
            out.length = r1 + r2;
            return out;
        }
        out.J = brent(h, lo, hi, flo, fhi, 0.0, ftol, 200, &out.iterations);
        out.length = arc_advance(r1, out.J) + arc_advance(r2, out.J);
    } else {
        // rho monotone from rlo to rhi
        auto h = [&](double J) {
            return phi_advance(rhi, J) - phi_advance(rlo, J) - dphi;
        };
        double lo = jmax * 1e-18, hi = jmax;
        double flo = h(lo), fhi = dphi_star - dphi;
        if (flo > 0.0) lo = jmax * 1e-120, flo = h(lo);
        if (flo > 0.0) {
            // dphi below quadrature resolution: treat as horizontal
            out.length = rhi - rlo;
            return out;
        }
        out.J = brent(h, lo, hi, flo, fhi, 0.0, ftol, 200, &out.iterations);
        out.length = arc_advance(rhi, out.J) - arc_advance(rlo, out.J);
    }
    return out;
}

// rho at given arc-advance target: invert arc_advance(rho, J) = g on
// [rho_lo, rho_hi] (arc_advance is strictly increasing in rho).
double invert_arc(double J, double target, double rho_lo, double rho_hi) {
    auto f = [&](double rho) { return arc_advance(rho, J) - target; };
    double flo = f(rho_lo), fhi = f(rho_hi);
    if (flo >= 0.0) return rho_lo;
    if (fhi <= 0.0) return rho_hi;
    return brent(f, rho_lo, rho_hi, flo, fhi, 1e-15 * std::max(1.0, rho_hi),
                 1e-14, 200);
}

} // namespace

HomogeneousPoint to_homogeneous(const ModelPoint& p) {
    if (p.is_basepoint())
        throw chart_error("to_homogeneous: P0 has no homogeneous chart");
    const double rho = p.rho();
    return {rho, rho * rho * rho * p.phi()};
}

ModelPoint from_homogeneous(const HomogeneousPoint& h) {
    if (!(h.rho > 0.0))
        throw std::domain_error("from_homogeneous: rho must be positive");
    return ModelPoint::interior(h.rho, h.Phi / (h.rho * h.rho * h.rho));
}

ModelPoint scale(double lambda, const ModelPoint& p) {
    if (!(lambda > 0.0))
        throw std::domain_error("scale: lambda must be positive");
    if (p.is_basepoint()) return p;
    const HomogeneousPoint h = to_homogeneous(p);
    return from_homogeneous({lambda * h.rho, lambda * h.Phi});
}

Metric2 metric_at(const ModelPoint& p, Chart chart) {
    if (p.is_basepoint())
        throw chart_error("metric_at: no chart covers P0");
    const double rho = p.rho();
    if (chart == Chart::Standard) {
        const double r3 = rho * rho * rho;
        return {1.0, 0.0, r3 * r3};
    }
    const HomogeneousPoint h = to_homogeneous(p);
    const double t = h.Phi / rho;
    return {1.0 + 9.0 * t * t, -3.0 * t, 1.0};
}

double tangent_norm(const ModelPoint& p, const TangentVector& v) {
    const Metric2 g = metric_at(p, Chart::Standard);
    return std::sqrt(g.g11 * v.d_rho * v.d_rho + g.g22 * v.d_phi * v.d_phi);
}

double GeodesicPath::max_unit_speed_defect() const {
    double worst = 0.0;
    for (const auto& s : samples) {
        const double r6 = std::pow(s.rho, 6);
        const double defect =
            std::fabs(s.rho_prime * s.rho_prime + clairaut_J * clairaut_J / r6 -
                      1.0);
        worst = std::max(worst, defect);
    }
    return worst;
}

double GeodesicPath::max_clairaut_drift() const {
    double worst = 0.0;
    for (const auto& s : samples) {
        const double up = 1.0 - s.rho_prime * s.rho_prime;
        const double j_measured =
            s.rho * s.rho * s.rho * std::sqrt(std::max(0.0, up));
        worst = std::max(worst, std::fabs(j_measured - std::fabs(clairaut_J)));
    }
    return worst;
}

GeodesicPath geodesic_ivp(const ModelPoint& start, const TangentVector& dir,
                          double length, double step, double rho_floor) {
    if (start.is_basepoint())
        throw chart_error("geodesic_ivp: cannot start at P0");
    if (!(step > 0.0)) throw std::domain_error("geodesic_ivp: step <= 0");
    if (!(length >= 0.0)) throw std::domain_error("geodesic_ivp: length < 0");

    GeodesicPath out;
    out.step = step;

    double a = dir.d_rho, b = dir.d_phi;
    const double norm = tangent_norm(start, dir);
    if (!(norm > 0.0))
        throw std::domain_error("geodesic_ivp: zero direction");
    if (std::fabs(norm - 1.0) > 1e-9) out.direction_normalized = true;
    a /= norm;
    b /= norm;

    double rho = start.rho();
    const double J = std::pow(rho, 6) * b;
    out.clairaut_J = J;

    double p = a;
    double phi = start.phi();
    double s = 0.0;
    out.samples.push_back({s, rho, phi, p});

    auto deriv = [J](double r, double& dr, double& dp, double& dphi, double pp) {
        const double r6 = std::pow(r, 6);
        dr = pp;
        dp = 3.0 * J * J / (r6 * r);
        dphi = J / r6;
    };

    const long nsteps = static_cast<long>(std::ceil(length / step - 1e-12));
    for (long i = 0; i < nsteps; ++i) {
        const double hstep = std::min(step, length - s);
        if (hstep <= 0.0) break;
        // classical RK4 on (rho, p, phi)
        double k1r, k1p, k1f, k2r, k2p, k2f, k3r, k3p, k3f, k4r, k4p, k4f;
        deriv(rho, k1r, k1p, k1f, p);
        deriv(rho + 0.5 * hstep * k1r, k2r, k2p, k2f, p + 0.5 * hstep * k1p);
        deriv(rho + 0.5 * hstep * k2r, k3r, k3p, k3f, p + 0.5 * hstep * k2p);
        deriv(rho + hstep * k3r, k4r, k4p, k4f, p + hstep * k3p);
        const double rho_next =
            rho + hstep / 6.0 * (k1r + 2 * k2r + 2 * k3r + k4r);
        if (rho_next <= rho_floor) {
            out.truncated_at_floor = true;
            break;
        }
        p += hstep / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
        phi += hstep / 6.0 * (k1f + 2 * k2f + 2 * k3f + k4f);
        rho = rho_next;
        s += hstep;
        out.samples.push_back({s, rho, phi, p});
    }
    return out;
}

BvpResult solve_bvp(const ModelPoint& p, const ModelPoint& q, double tol,
                    double rho_floor) {
    if (p.is_basepoint() || q.is_basepoint())
        throw std::domain_error("solve_bvp: endpoints must be interior");
    BvpResult out;
    const double dphi = q.phi() - p.phi();
    const Shot shot = shoot_clairaut(p.rho(), q.rho(), std::fabs(dphi), tol);
    out.length = shot.length;
    out.clairaut_J = (dphi < 0.0 ? -shot.J : shot.J);
    out.turning = shot.turning;
    out.rho_min = shot.turning ? std::cbrt(shot.J)
                               : std::min(p.rho(), q.rho());
    out.iterations = shot.iterations;
    if (!shot.converged)
        out.status = BvpStatus::Unresolved;
    else if (shot.turning && out.rho_min < rho_floor)
        out.status = BvpStatus::NearBasepoint;
    return out;
}

BvpPath geodesic_bvp(const ModelPoint& p, const ModelPoint& q, double tol,
                     double step, double rho_floor) {
    BvpPath out;
    const BvpResult r = solve_bvp(p, q, tol, rho_floor);
    out.length = r.length;
    out.status = r.status;
    if (r.status == BvpStatus::Unresolved) return out;

    const double sphi = (r.clairaut_J < 0.0) ? -1.0 : 1.0;
    const double J = std::fabs(r.clairaut_J);
    double a;
    if (r.turning) {
        a = -std::sqrt(std::max(0.0, 1.0 - std::pow(J / std::pow(p.rho(), 3), 2)));
    } else {
        const double up = 1.0 - std::pow(J / std::pow(p.rho(), 3), 2);
        a = (q.rho() >= p.rho() ? 1.0 : -1.0) * std::sqrt(std::max(0.0, up));
    }
    const double b = sphi * J / std::pow(p.rho(), 6);
    out.path = geodesic_ivp(p, {a, b}, r.length, step,
                            std::min(rho_floor, 0.5 * r.rho_min));
    return out;
}

DistanceResult distance_ex(const ModelPoint& p, const ModelPoint& q,
                           double tol, double rho_floor) {
    DistanceResult out;
    if (p.is_basepoint() && q.is_basepoint()) return out;
    if (p.is_basepoint()) {
        out.value = q.rho();
        return out;
    }
    if (q.is_basepoint()) {
        out.value = p.rho();
        return out;
    }
    if (p.rho() == q.rho() && p.phi() == q.phi()) return out;
    const BvpResult r = solve_bvp(p, q, tol, rho_floor);
    out.value = r.length;
    out.status = r.status;
    return out;
}

double distance(const ModelPoint& p, const ModelPoint& q) {
    return distance_ex(p, q).value;
}

ModelPoint geodesic_point(const ModelPoint& p, const ModelPoint& q, double t) {
    if (t <= 0.0) return p;
    if (t >= 1.0) return q;
    if (p.is_basepoint() && q.is_basepoint()) return p;
    // segments through P0 are horizontal rays
    if (p.is_basepoint()) {
        return ModelPoint::interior(t * q.rho(), q.phi());
    }
    if (q.is_basepoint()) {
        const double r = (1.0 - t) * p.rho();
        if (r <= 0.0) return ModelPoint::basepoint();
        return ModelPoint::interior(r, p.phi());
    }
    const BvpResult r = solve_bvp(p, q);
    const double s = t * r.length;
    const double J = std::fabs(r.clairaut_J);
    const double sphi = (r.clairaut_J < 0.0) ? -1.0 : 1.0;
    if (J == 0.0) {
        return ModelPoint::interior(p.rho() + t * (q.rho() - p.rho()), p.phi());
    }
    const double rt = std::cbrt(J);
    double rho, phi;
    if (r.turning) {
        const double st = arc_advance(p.rho(), J); // arclength p -> turning
        if (s <= st) {
            rho = invert_arc(J, st - s, rt, p.rho());
            phi = p.phi() + sphi * (phi_advance(p.rho(), J) - phi_advance(rho, J));
        } else {
            rho = invert_arc(J, s - st, rt, std::max(p.rho(), q.rho()) + r.length);
            phi = p.phi() + sphi * (phi_advance(p.rho(), J) + phi_advance(rho, J));
        }
    } else {
        const double gp = arc_advance(p.rho(), J);
        const double srho = (q.rho() >= p.rho()) ? 1.0 : -1.0;
        rho = invert_arc(J, gp + srho * s, rt,
                         std::max(p.rho(), q.rho()) + r.length + 1.0);
        phi = p.phi() +
              sphi * std::fabs(phi_advance(rho, J) - phi_advance(p.rho(), J));
    }
    return ModelPoint::interior(rho, phi);
}

TangentVector log_map(const ModelPoint& p, const ModelPoint& q) {
    if (p.is_basepoint())
        throw chart_error("log_map: base point must be interior");
    if (q.is_basepoint()) return {-p.rho(), 0.0};
    if (p.rho() == q.rho() && p.phi() == q.phi()) return {0.0, 0.0};
    const BvpResult r = solve_bvp(p, q);
    const double J = std::fabs(r.clairaut_J);
    const double sphi = (r.clairaut_J < 0.0) ? -1.0 : 1.0;
    const double x = J / std::pow(p.rho(), 3);
    const double up = std::max(0.0, 1.0 - x * x);
    double a;
    if (r.turning)
        a = -std::sqrt(up);
    else
        a = (q.rho() >= p.rho() ? 1.0 : -1.0) * std::sqrt(up);
    const double b = sphi * J / std::pow(p.rho(), 6);
    return {r.length * a, r.length * b};
}

ModelPoint exp_map(const ModelPoint& p, const TangentVector& v) {
    if (p.is_basepoint())
        throw chart_error("exp_map: base point must be interior");
    const double m = tangent_norm(p, v);
    if (m == 0.0) return p;
    const double a = v.d_rho / m;
    const double b = v.d_phi / m;
    const double rho0 = p.rho();
    const double J = std::pow(rho0, 6) * std::fabs(b);
    const double sphi = (b < 0.0) ? -1.0 : 1.0;
    if (J == 0.0) {
        const double rho = rho0 + a * m;
        if (rho <= 0.0) return ModelPoint::basepoint();
        return ModelPoint::interior(rho, p.phi());
    }
    const double rt = std::cbrt(J);
    double rho, dphi;
    if (a < 0.0) {
        const double st = arc_advance(rho0, J);
        if (m <= st) {
            rho = invert_arc(J, st - m, rt, rho0);
            dphi = phi_advance(rho0, J) - phi_advance(rho, J);
        } else {
            rho = invert_arc(J, m - st, rt, rho0 + m + 1.0);
            dphi = phi_advance(rho0, J) + phi_advance(rho, J);
        }
    } else {
        rho = invert_arc(J, arc_advance(rho0, J) + m, rt, rho0 + m + 1.0);
        dphi = phi_advance(rho, J) - phi_advance(rho0, J);
    }
    return ModelPoint::interior(rho, p.phi() + sphi * dphi);
}

SymmetricGeodesic symmetric_geodesic(double rho0, double span, double step) {
    if (!(rho0 > 0.0))
        throw std::domain_error("symmetric_geodesic: rho0 must be positive");
    if (!(span > 0.0) || !(step > 0.0))
        throw std::domain_error("symmetric_geodesic: span and step > 0");
    SymmetricGeodesic out;
    out.rho0 = rho0;
    out.phi_infinity = cstar() / (rho0 * rho0);

    const ModelPoint start = ModelPoint::interior(rho0, 0.0);
    const double b = 1.0 / (rho0 * rho0 * rho0);
    GeodesicPath fwd = geodesic_ivp(start, {0.0, b}, span, step);
    GeodesicPath bwd = geodesic_ivp(start, {0.0, -b}, span, step);

    out.path.clairaut_J = fwd.clairaut_J;
    out.path.step = step;
    for (auto it = bwd.samples.rbegin(); it != bwd.samples.rend(); ++it) {
        if (it->s == 0.0) continue;
        out.path.samples.push_back({-it->s, it->rho, it->phi, -it->rho_prime});
    }
    for (const auto& s : fwd.samples) out.path.samples.push_back(s);
    return out;
}

double symmetric_phi_at_rho(double rho0, double rho) {
    const double J = rho0 * rho0 * rho0;
    if (rho < rho0) rho = rho0;
    return phi_advance(rho, J);
}

double symmetric_rho_at_phi(double rho0, double phi_abs) {
    if (phi_abs <= 0.0) return rho0;
    const double J = rho0 * rho0 * rho0;
    const double phi_inf = cstar() / (rho0 * rho0);
    if (phi_abs >= phi_inf)
        return std::numeric_limits<double>::infinity();
    auto f = [&](double rho) { return phi_advance(rho, J) - phi_abs; };
    double lo = rho0, hi = 2.0 * rho0;
    double flo = f(lo), fhi = f(hi);
    int guard = 0;
    while (fhi < 0.0 && guard++ < 2000) {
        lo = hi;
        flo = fhi;
        hi *= 2.0;
        fhi = f(hi);
    }
    if (fhi < 0.0) return std::numeric_limits<double>::infinity();
    return brent(f, lo, hi, flo, fhi, 0.0, 1e-15, 200);
}

double symmetric_arclength_at_rho(double rho0, double rho) {
    const double J = rho0 * rho0 * rho0;
    if (rho < rho0) rho = rho0;
    return arc_advance(rho, J);
}

ModelPoint symmetric_point_at_arclength(double rho0, double s) {
    const double J = rho0 * rho0 * rho0;
    const double sa = std::fabs(s);
    const double rho = invert_arc(J, sa, rho0, rho0 + sa + 1.0);
    const double phi = phi_advance(rho, J);
    return ModelPoint::interior(rho, s < 0.0 ? -phi : phi);
}

ConvexRegion::ConvexRegion(double rho0, double span, double step)
    : rho0_(rho0) {
    if (!(rho0 > 0.0))
        throw std::domain_error("ConvexRegion: rho0 must be positive");
    phi_inf_ = cstar() / (rho0 * rho0);
    const double sp = (span > 0.0) ? span : std::max(6.0 * rho0, 4.0);
    generator_ = symmetric_geodesic(rho0, sp, step);
}

ContainResult ConvexRegion::contains(const ModelPoint& p,
                                     double border_tol) const {
    ContainResult out;
    if (p.is_basepoint()) return out;
    const double pa = std::fabs(p.phi());
    if (pa >= phi_inf_ - border_tol) {
        out.borderline = (pa < phi_inf_ + border_tol);
        return out; // conservative: borderline classified outside
    }
    const double rho_curve = symmetric_rho_at_phi(rho0_, pa);
    out.inside = (p.rho() >= rho_curve * (1.0 - 1e-13));
    return out;
}

ModelPoint ConvexRegion::project(const ModelPoint& p) const {
    if (contains(p).inside) return p;
    if (p.is_basepoint()) return ModelPoint::interior(rho0_, 0.0);

    const double sgn = (p.phi() < 0.0) ? -1.0 : 1.0;
    const ModelPoint pref =
        sgn < 0 ? ModelPoint::interior(p.rho(), -p.phi()) : p;

    // The projection lies on the half-branch with matching phi sign;
    // d(p, gamma(s)) is unimodal in s by convexity of the region.
    const ModelPoint g0 = ModelPoint::interior(rho0_, 0.0);
    const double d0 = distance(pref, g0);
    const double rho_hi = pref.rho() + d0 + rho0_;
    double b = symmetric_arclength_at_rho(rho0_, rho_hi);
    double a = 0.0;
    auto eval = [&](double s) {
        return distance(pref, symmetric_point_at_arclength(rho0_, s));
    };
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = eval(x1), f2 = eval(x2);
    for (int i = 0; i < 120 && (b - a) > 1e-13 * (1.0 + b); ++i) {
        if (f1 < f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - gr * (b - a);
            f1 = eval(x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + gr * (b - a);
            f2 = eval(x2);
        }
    }
    const double s_best = 0.5 * (a + b);
    ModelPoint proj = symmetric_point_at_arclength(rho0_, s_best);
    if (sgn < 0) proj = ModelPoint::interior(proj.rho(), -proj.phi());
    return proj;
}

double ConvexRegion::distance_to(const ModelPoint& p) const {
    if (contains(p).inside) return 0.0;
    return distance(p, project(p));
}

GapResult gamma_gap(double rho0, double r, int samples_per_curve) {
    if (!(rho0 > 0.0) || !(r > 0.0))
        throw std::domain_error("gamma_gap: rho0 and r must be positive");
    if (!(rho0 < r))
        throw std::domain_error("gamma_gap: requires rho0 < r");
    GapResult out;
    const int n = std::max(16, samples_per_curve);

    // curve A: Gamma_{rho0}, curve B: Gamma_{rho0/2} with rho >= r
    const double rho_cap = 2.0 * r + rho0;
    const double sa_max = symmetric_arclength_at_rho(rho0, rho_cap);
    const double sb_min = symmetric_arclength_at_rho(rho0 / 2.0, r);
    const double sb_max = symmetric_arclength_at_rho(rho0 / 2.0, rho_cap);

    // by the phi-reflection symmetry the minimizing pair can be taken with
    // both points on the upper half-branches or A on the lower: sample A
    // signed, B upper only
    std::vector<ModelPoint> A, B;
    A.reserve(2 * n + 1);
    B.reserve(n + 1);
    for (int i = -n; i <= n; ++i)
        A.push_back(symmetric_point_at_arclength(rho0, sa_max * i / n));
    for (int i = 0; i <= n; ++i)
        B.push_back(symmetric_point_at_arclength(
            rho0 / 2.0, sb_min + (sb_max - sb_min) * i / n));

    double best = std::numeric_limits<double>::infinity();
    int bi = 0, bj = 0;
    for (int i = 0; i < static_cast<int>(A.size()); ++i)
        for (int j = 0; j < static_cast<int>(B.size()); ++j) {
            const double d = distance(A[i], B[j]);
            if (d < best) {
                best = d;
                bi = i;
                bj = j;
            }
        }
    out.resolution_warning =
        (bi == 0 || bi + 1 == static_cast<int>(A.size()) ||
         bj + 1 == static_cast<int>(B.size()));

    // local refinement: alternating golden-section in the two arclengths
    double s1 = sa_max * (bi - n) / n;
    double s2 = sb_min + (sb_max - sb_min) * bj / n;
    const double w1 = sa_max / n, w2 = (sb_max - sb_min) / n;
    auto dist_at = [&](double u, double v) {
        return distance(symmetric_point_at_arclength(rho0, u),
                        symmetric_point_at_arclength(rho0 / 2.0,
                                                     std::max(sb_min, v)));
    };
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int round = 0; round < 8; ++round) {
        // refine s1
        double a = s1 - w1, b = s1 + w1;
        double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
        double f1 = dist_at(x1, s2), f2 = dist_at(x2, s2);
        for (int i = 0; i < 40; ++i) {
            if (f1 < f2) {
                b = x2; x2 = x1; f2 = f1;
                x1 = b - gr * (b - a);
                f1 = dist_at(x1, s2);
            } else {
                a = x1; x1 = x2; f1 = f2;
                x2 = a + gr * (b - a);
                f2 = dist_at(x2, s2);
            }
        }
        s1 = 0.5 * (a + b);
        // refine s2
        a = std::max(sb_min, s2 - w2);
        b = s2 + w2;
        x1 = b - gr * (b - a);
        x2 = a + gr * (b - a);
        f1 = dist_at(s1, x1);
        f2 = dist_at(s1, x2);
        for (int i = 0; i < 40; ++i) {
            if (f1 < f2) {
                b = x2; x2 = x1; f2 = f1;
                x1 = b - gr * (b - a);
                f1 = dist_at(s1, x1);
            } else {
                a = x1; x1 = x2; f1 = f2;
                x2 = a + gr * (b - a);
                f2 = dist_at(s1, x2);
            }
        }
        s2 = std::max(sb_min, 0.5 * (a + b));
    }
    out.arg_a = symmetric_point_at_arclength(rho0, s1);
    out.arg_b = symmetric_point_at_arclength(rho0 / 2.0, s2);
    out.value = std::min(best, distance(out.arg_a, out.arg_b));
    return out;
}

} // namespace wpharm

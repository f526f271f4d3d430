#include "wpharm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace wpharm {

namespace {

double sqr(double x) { return x * x; }

double factor_rho(const GluedPoint& g) {
    return g.is_basepoint() ? 0.0 : g.point().rho();
}

// cross-term weight omega(rho) = min(1, rho^kappa) on an edge
double edge_omega(const MapValue& a, const MapValue& b, double kappa) {
    const double rho =
        std::min(factor_rho(a.singular.front()), factor_rho(b.singular.front()));
    return std::min(1.0, std::pow(rho, kappa));
}

double cross_term(const Target& t, const MapValue& a, const MapValue& b) {
    if (t.kind != Target::Kind::Product || !t.kappa || t.j == 0 || t.m == 0)
        return 0.0;
    const double om = edge_omega(a, b, *t.kappa);
    const double dv = a.regular[0] - b.regular[0];
    const double dr = factor_rho(a.singular.front()) -
                      factor_rho(b.singular.front());
    return t.coupling * om * dv * dr;
}

// Neighbor of one singular factor resolved against a candidate sheet:
// same-sheet neighbors keep their coordinates, all others pull radially
// through the shared basepoint.
struct FactorNeighbor {
    bool same_sheet;
    double rho;
    double phi;
};

double factor_objective(double rho, double phi,
                        const std::vector<FactorNeighbor>& nbrs,
                        const std::vector<double>& w) {
    const ModelPoint p = ModelPoint::interior(rho, phi);
    double f = 0.0;
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
        if (nbrs[k].same_sheet)
            f += w[k] * sqr(distance(
                             p, ModelPoint::interior(nbrs[k].rho, nbrs[k].phi)));
        else
            f += w[k] * sqr(rho + nbrs[k].rho);
    }
    return f;
}

struct SheetCandidate {
    double rho = 0.0;
    double phi = 0.0;
    double objective = std::numeric_limits<double>::infinity();
    bool flagged = false;
};

// Damped tangent-mean descent with backtracking; the objective is
// geodesically convex, so accepted steps converge to the sheet minimizer.
SheetCandidate minimize_on_sheet(double rho_start, double phi_start,
                                 const std::vector<FactorNeighbor>& nbrs,
                                 const std::vector<double>& w, double damping,
                                 double tol) {
    SheetCandidate out;
    double W = 0.0;
    for (double wk : w) W += wk;

    double rho = rho_start, phi = phi_start;
    double f = factor_objective(rho, phi, nbrs, w);
    double scale = rho;
    for (const auto& nb : nbrs) scale = std::max(scale, nb.rho);
    const double vtol = std::max(tol, 1e-14 * std::max(1.0, scale));

    double tau = damping;
    bool done = false;
    for (int it = 0; it < 300 && !done; ++it) {
        const ModelPoint p = ModelPoint::interior(rho, phi);
        double vr = 0.0, vp = 0.0;
        for (std::size_t k = 0; k < nbrs.size(); ++k) {
            TangentVector lg;
            if (nbrs[k].same_sheet)
                lg = log_map(p, ModelPoint::interior(nbrs[k].rho, nbrs[k].phi));
            else
                lg = {-(rho + nbrs[k].rho), 0.0};
            vr += w[k] * lg.d_rho;
            vp += w[k] * lg.d_phi;
        }
        vr /= W;
        vp /= W;
        const double vnorm = tangent_norm(p, {vr, vp});
        if (vnorm < vtol) break;

        bool accepted = false;
        for (int bt = 0; bt < 45; ++bt) {
            const ModelPoint trial = exp_map(p, {tau * vr, tau * vp});
            if (trial.is_basepoint()) {
                tau *= 0.5;
                continue;
            }
            const double ftrial =
                factor_objective(trial.rho(), trial.phi(), nbrs, w);
            if (ftrial <= f) {
                if (f - ftrial < 1e-15 * (1.0 + f)) done = true;
                rho = trial.rho();
                phi = trial.phi();
                f = ftrial;
                accepted = true;
                tau = std::min(1.0, tau * 1.5);
                break;
            }
            tau *= 0.5;
        }
        if (!accepted) {
            out.flagged = vnorm > 1e4 * vtol;
            break;
        }
    }
    out.rho = rho;
    out.phi = phi;
    out.objective = f;
    return out;
}

std::vector<FactorNeighbor> resolve_neighbors(
    int sheet, const std::vector<const GluedPoint*>& pts) {
    std::vector<FactorNeighbor> out;
    out.reserve(pts.size());
    for (const GluedPoint* g : pts) {
        if (g->is_basepoint())
            out.push_back({false, 0.0, 0.0});
        else if (g->sheet() == sheet)
            out.push_back({true, g->point().rho(), g->point().phi()});
        else
            out.push_back({false, g->point().rho(), 0.0});
    }
    return out;
}

GluedPoint update_factor(const GluedPoint& current,
                         const std::vector<const GluedPoint*>& nbrs,
                         const std::vector<double>& w, double damping,
                         double tol, bool* flagged) {
    double W = 0.0;
    for (double wk : w) W += wk;
    if (!(W > 0.0))
        throw std::domain_error("frechet_update: zero total weight");

    // the basepoint competitor F(P0) = sum w_j rho_j^2, always evaluated
    double f_p0 = 0.0;
    for (std::size_t k = 0; k < nbrs.size(); ++k)
        f_p0 += w[k] * sqr(factor_rho(*nbrs[k]));

    std::vector<int> sheets;
    for (const GluedPoint* g : nbrs)
        if (!g->is_basepoint()) sheets.push_back(g->sheet());
    if (!current.is_basepoint()) sheets.push_back(current.sheet());
    std::sort(sheets.begin(), sheets.end());
    sheets.erase(std::unique(sheets.begin(), sheets.end()), sheets.end());

    GluedPoint best = GluedPoint::basepoint();
    double fbest = f_p0;
    for (int sheet : sheets) {
        const auto resolved = resolve_neighbors(sheet, nbrs);
        double r0 = 0.0, p0 = 0.0, wacc = 0.0;
        if (!current.is_basepoint() && current.sheet() == sheet) {
            r0 = current.point().rho();
            p0 = current.point().phi();
            wacc = 1.0;
        } else {
            for (std::size_t k = 0; k < resolved.size(); ++k)
                if (resolved[k].same_sheet) {
                    r0 += w[k] * resolved[k].rho;
                    p0 += w[k] * resolved[k].phi;
                    wacc += w[k];
                }
            if (wacc > 0.0) {
                r0 /= wacc;
                p0 /= wacc;
            }
        }
        if (!(wacc > 0.0) || !(r0 > 0.0)) continue;
        const SheetCandidate cand =
            minimize_on_sheet(r0, p0, resolved, w, damping, tol);
        if (cand.flagged && flagged) *flagged = true;
        // ties break toward the interior candidate
        if (cand.objective <= fbest) {
            best = GluedPoint::on_sheet(sheet, cand.rho, cand.phi);
            fbest = cand.objective;
        } else if (best.is_basepoint() &&
                   cand.objective <= fbest * (1.0 + 1e-13)) {
            best = GluedPoint::on_sheet(sheet, cand.rho, cand.phi);
        }
    }
    return best;
}

GluedPoint project_factor(const ConvexRegion& region, const GluedPoint& g) {
    if (g.is_basepoint())
        return GluedPoint::on_sheet(0, region.project(ModelPoint::basepoint()));
    return GluedPoint::on_sheet(g.sheet(), region.project(g.point()));
}

} // namespace

double value_distance(const MapValue& a, const MapValue& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.regular.size(); ++i)
        acc += sqr(a.regular[i] - b.regular[i]);
    for (std::size_t i = 0; i < a.singular.size(); ++i)
        acc += sqr(distance_A(a.singular[i], b.singular[i]));
    return std::sqrt(acc);
}

double discrete_energy(const DiscreteMap& map) {
    double e = 0.0;
    for (const auto& edge : map.mesh->edges) {
        const MapValue& a = map.values[edge.a];
        const MapValue& b = map.values[edge.b];
        e += edge.w *
             (sqr(value_distance(a, b)) + cross_term(map.target, a, b));
    }
    return e;
}

MapValue frechet_update(const Target& target, const MapValue& current,
                        const std::vector<MapValue>& neighbors,
                        const std::vector<double>& weights, double damping,
                        double tol, bool* flagged, const ConvexRegion* region) {
    if (neighbors.empty() || neighbors.size() != weights.size())
        throw std::domain_error("frechet_update: bad neighbor list");
    double W = 0.0;
    for (double w : weights) W += w;
    if (!(W > 0.0))
        throw std::domain_error("frechet_update: zero total weight");

    MapValue out = current;

    const int rd = target.regular_dim();
    for (int c = 0; c < rd; ++c) {
        double acc = 0.0;
        for (std::size_t k = 0; k < neighbors.size(); ++k)
            acc += weights[k] * neighbors[k].regular[c];
        out.regular[c] = acc / W;
    }
    if (rd > 0 && target.kappa) {
        // coupled first coordinate: d/dV1 of the local energy including the
        // cross term, with omega frozen at the current value
        double force = 0.0;
        for (std::size_t k = 0; k < neighbors.size(); ++k) {
            const double om = edge_omega(current, neighbors[k], *target.kappa);
            const double dr = factor_rho(current.singular.front()) -
                              factor_rho(neighbors[k].singular.front());
            force += weights[k] * target.coupling * om * dr;
        }
        out.regular[0] -= 0.5 * force / W;
    }

    for (std::size_t f = 0; f < current.singular.size(); ++f) {
        std::vector<const GluedPoint*> pts(neighbors.size());
        for (std::size_t k = 0; k < neighbors.size(); ++k)
            pts[k] = &neighbors[k].singular[f];
        out.singular[f] =
            update_factor(current.singular[f], pts, weights, damping, tol,
                          flagged);
        if (region) out.singular[f] = project_factor(*region, out.singular[f]);
    }
    return out;
}

namespace {

// chart-harmonic initial guess: scalar harmonic extensions per coordinate
// on single-sheet boundaries, nearest-boundary copies otherwise
std::vector<MapValue> initial_guess(const Mesh& mesh,
                                    const std::vector<MapValue>& boundary,
                                    const Target& target) {
    const std::size_t n = mesh.n_vertices();
    std::vector<MapValue> values = boundary;
    const int rd = target.regular_dim();
    const std::size_t nf = boundary[0].singular.size();
    for (std::size_t v = 0; v < n; ++v) {
        if (mesh.boundary[v]) continue;
        values[v].regular.assign(rd, 0.0);
        values[v].singular.assign(nf, GluedPoint::basepoint());
    }

    for (int c = 0; c < rd; ++c) {
        std::vector<double> b(n, 0.0);
        for (std::size_t v = 0; v < n; ++v)
            if (mesh.boundary[v]) b[v] = boundary[v].regular[c];
        const auto sol = scalar_harmonic(mesh, b);
        for (std::size_t v = 0; v < n; ++v)
            if (!mesh.boundary[v]) values[v].regular[c] = sol[v];
    }

    for (std::size_t f = 0; f < nf; ++f) {
        bool one_sheet = true;
        int sheet = -1;
        for (std::size_t v = 0; v < n && one_sheet; ++v) {
            if (!mesh.boundary[v]) continue;
            const GluedPoint& g = boundary[v].singular[f];
            if (g.is_basepoint())
                one_sheet = false;
            else if (sheet < 0)
                sheet = g.sheet();
            else if (sheet != g.sheet())
                one_sheet = false;
        }
        if (one_sheet && sheet >= 0) {
            std::vector<double> br(n, 0.0), bp(n, 0.0);
            for (std::size_t v = 0; v < n; ++v)
                if (mesh.boundary[v]) {
                    br[v] = boundary[v].singular[f].point().rho();
                    bp[v] = boundary[v].singular[f].point().phi();
                }
            const auto sr = scalar_harmonic(mesh, br);
            const auto sp = scalar_harmonic(mesh, bp);
            for (std::size_t v = 0; v < n; ++v)
                if (!mesh.boundary[v])
                    values[v].singular[f] = GluedPoint::on_sheet(
                        sheet, std::max(sr[v], 1e-12), sp[v]);
        } else {
            std::vector<int> order;
            std::vector<char> seen(n, 0);
            std::vector<GluedPoint> fill(n, GluedPoint::basepoint());
            for (std::size_t v = 0; v < n; ++v)
                if (mesh.boundary[v]) {
                    order.push_back(static_cast<int>(v));
                    seen[v] = 1;
                    fill[v] = boundary[v].singular[f];
                }
            for (std::size_t head = 0; head < order.size(); ++head) {
                const int v = order[head];
                for (const auto& nb : mesh.neighbors(v))
                    if (!seen[nb.vertex]) {
                        seen[nb.vertex] = 1;
                        fill[nb.vertex] = fill[v];
                        order.push_back(nb.vertex);
                    }
            }
            for (std::size_t v = 0; v < n; ++v)
                if (!mesh.boundary[v]) values[v].singular[f] = fill[v];
        }
    }
    return values;
}

// Laplacian-preconditioned CG over the interior vertices for the two
// frame components of the global descent step.
void laplace_cg(const Mesh& mesh, const std::vector<int>& interior,
                const std::vector<char>& free_v, const std::vector<double>& b,
                std::vector<double>& x) {
    const std::size_t n = mesh.n_vertices();
    const std::size_t m = interior.size();
    std::vector<int> pos(n, -1);
    for (std::size_t i = 0; i < m; ++i) pos[interior[i]] = static_cast<int>(i);
    std::vector<double> diag(m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (const auto& nb : mesh.neighbors(interior[i]))
            diag[i] += nb.weight;
    auto apply = [&](const std::vector<double>& in, std::vector<double>& out) {
        for (std::size_t i = 0; i < m; ++i) {
            const int v = interior[i];
            double acc = diag[i] * in[i];
            for (const auto& nb : mesh.neighbors(v))
                if (free_v[nb.vertex]) acc -= nb.weight * in[pos[nb.vertex]];
            out[i] = acc;
        }
    };
    std::vector<double> u(m, 0.0), r(m), z(m), p(m), Ap(m);
    double bn = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        r[i] = b[interior[i]];
        bn += r[i] * r[i];
    }
    bn = std::sqrt(std::max(bn, 1e-300));
    for (std::size_t i = 0; i < m; ++i) z[i] = r[i] / std::max(diag[i], 1e-300);
    p = z;
    double rz = 0.0;
    for (std::size_t i = 0; i < m; ++i) rz += r[i] * z[i];
    for (int it = 0; it < 3000; ++it) {
        double rn = 0.0;
        for (std::size_t i = 0; i < m; ++i) rn += r[i] * r[i];
        if (std::sqrt(rn) <= 1e-10 * bn) break;
        apply(p, Ap);
        double pAp = 0.0;
        for (std::size_t i = 0; i < m; ++i) pAp += p[i] * Ap[i];
        const double alpha = rz / std::max(pAp, 1e-300);
        for (std::size_t i = 0; i < m; ++i) {
            u[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        for (std::size_t i = 0; i < m; ++i)
            z[i] = r[i] / std::max(diag[i], 1e-300);
        double rz_new = 0.0;
        for (std::size_t i = 0; i < m; ++i) rz_new += r[i] * z[i];
        const double beta = rz_new / std::max(rz, 1e-300);
        rz = rz_new;
        for (std::size_t i = 0; i < m; ++i) p[i] = z[i] + beta * p[i];
    }
    x.assign(n, 0.0);
    for (std::size_t i = 0; i < m; ++i) x[interior[i]] = u[i];
}

// One inexact-Newton global step for single-factor maps away from P0: the
// exact energy gradient (tangent means through log maps, in the orthonormal
// frame d_rho, rho^3 d_phi) preconditioned by the scalar graph Laplacian,
// applied through exp with a global backtracking line search on the true
// energy. Returns true if an energy-decreasing state was produced in-place.
bool global_descent_step(const Mesh& mesh, DiscreteMap& map,
                         const std::vector<int>& interior, double& energy_io) {
    const std::size_t n = mesh.n_vertices();
    std::vector<char> free_v(n, 0);
    for (int v : interior) free_v[v] = 1;

    const int sheet = map.values[0].singular.front().is_basepoint()
                          ? 0
                          : map.values[0].singular.front().sheet();
    std::vector<double> g1(n, 0.0), g2(n, 0.0);
    for (int v : interior) {
        const GluedPoint& gv = map.values[v].singular.front();
        if (gv.is_basepoint() || gv.sheet() != sheet) return false;
        const ModelPoint p = gv.point();
        double ar = 0.0, ap = 0.0;
        for (const auto& nb : mesh.neighbors(v)) {
            const GluedPoint& gq = map.values[nb.vertex].singular.front();
            if (!gq.is_basepoint() && gq.sheet() != sheet) return false;
            TangentVector lg;
            if (gq.is_basepoint())
                lg = {-p.rho(), 0.0};
            else
                lg = log_map(p, gq.point());
            ar += nb.weight * lg.d_rho;
            ap += nb.weight * lg.d_phi;
        }
        const double r3 = std::pow(p.rho(), 3);
        g1[v] = ar;
        g2[v] = ap * r3; // frame component along rho^3 d_phi
    }

    std::vector<double> x1, x2;
    laplace_cg(mesh, interior, free_v, g1, x1);
    laplace_cg(mesh, interior, free_v, g2, x2);

    const std::vector<MapValue> saved = map.values;
    double tau = 1.0;
    for (int bt = 0; bt < 8; ++bt) {
        bool valid = true;
        for (int v : interior) {
            const ModelPoint p = saved[v].singular.front().point();
            const double r3 = std::pow(p.rho(), 3);
            const ModelPoint moved =
                exp_map(p, {tau * x1[v], tau * x2[v] / r3});
            if (moved.is_basepoint()) {
                valid = false;
                break;
            }
            map.values[v].singular.front() =
                GluedPoint::on_sheet(sheet, moved);
        }
        if (valid) {
            const double e_try = discrete_energy(map);
            if (e_try < energy_io) {
                energy_io = e_try;
                return true;
            }
        }
        tau *= 0.5;
    }
    map.values = saved;
    return false;
}

std::vector<std::vector<int>> color_groups(const Mesh& mesh,
                                           const std::vector<int>& interior) {
    std::vector<int> color(mesh.n_vertices(), -1);
    int max_color = 0;
    for (int v : interior) {
        std::vector<char> used(static_cast<std::size_t>(max_color) + 2, 0);
        for (const auto& nb : mesh.neighbors(v))
            if (color[nb.vertex] >= 0) used[color[nb.vertex]] = 1;
        int c = 0;
        while (used[c]) ++c;
        color[v] = c;
        max_color = std::max(max_color, c);
    }
    std::vector<std::vector<int>> groups(max_color + 1);
    for (int v : interior) groups[color[v]].push_back(v);
    return groups;
}

std::pair<DiscreteMap, SolveReport> run_solve(
    std::shared_ptr<const Mesh> mesh_ptr,
    const std::vector<MapValue>& boundary, const Target& target,
    const Schedule& schedule, const ConvexRegion* region) {
    const Mesh& mesh = *mesh_ptr;
    const std::size_t n = mesh.n_vertices();
    if (boundary.size() != n)
        throw std::domain_error("solve: boundary vector size mismatch");

    DiscreteMap map;
    map.mesh = mesh_ptr;
    map.target = target;
    map.values = initial_guess(mesh, boundary, target);
    map.frozen.assign(n, 0);
    for (std::size_t v = 0; v < n; ++v) map.frozen[v] = mesh.boundary[v];
    if (region)
        for (std::size_t v = 0; v < n; ++v)
            map.values[v].singular.front() =
                project_factor(*region, map.values[v].singular.front());

    SolveReport report;
    std::vector<int> interior;
    for (std::size_t v = 0; v < n; ++v)
        if (!map.frozen[v]) interior.push_back(static_cast<int>(v));

    std::vector<char> flag(n, 0);
    double energy = discrete_energy(map);
    report.energy_history.push_back(energy);

    const bool guard = target.kappa.has_value();
    auto local_energy = [&](int v) {
        double e = 0.0;
        for (const auto& nb : mesh.neighbors(v))
            e += nb.weight *
                 (sqr(value_distance(map.values[v], map.values[nb.vertex])) +
                  cross_term(target, map.values[v], map.values[nb.vertex]));
        return e;
    };

    auto update_vertex = [&](int v, double local_tol) {
        std::vector<MapValue> nvals;
        std::vector<double> w;
        for (const auto& nb : mesh.neighbors(v)) {
            if (nb.weight <= 0.0) continue;
            nvals.push_back(map.values[nb.vertex]);
            w.push_back(nb.weight);
        }
        if (nvals.empty()) return 0.0;
        bool fl = false;
        const MapValue next =
            frechet_update(target, map.values[v], nvals, w, schedule.damping,
                           local_tol, &fl, region);
        if (fl) flag[v] = 1;
        const double move = value_distance(map.values[v], next);
        if (guard) {
            // the coupled cross term is not part of the local minimization;
            // keep the sweep monotone by rejecting increases
            const double before = local_energy(v);
            const MapValue saved = map.values[v];
            map.values[v] = next;
            if (local_energy(v) > before) {
                map.values[v] = saved;
                return 0.0;
            }
            return move;
        }
        map.values[v] = next;
        return move;
    };

    std::vector<std::vector<int>> groups;
    if (schedule.mode == Schedule::Mode::Parallel)
        groups = color_groups(mesh, interior);

    int accel_failures =
        (schedule.accelerate && target.kind == Target::Kind::Model &&
         region == nullptr && target.regular_dim() == 0)
            ? 0
            : 1000;
    double last_move = std::numeric_limits<double>::infinity();
    for (int sweep = 0; sweep < schedule.max_sweeps; ++sweep) {
        const double local_tol = std::clamp(0.02 * last_move, 1e-14, 1e-9);
        double max_move = 0.0;
        if (schedule.mode == Schedule::Mode::Sequential) {
            for (int v : interior)
                max_move = std::max(max_move, update_vertex(v, local_tol));
        } else {
            for (const auto& group : groups) {
                std::vector<double> moves(group.size(), 0.0);
                const int nt = std::max(1, schedule.threads);
                const std::size_t chunk = (group.size() + nt - 1) / nt;
                std::vector<std::thread> pool;
                for (int t = 0; t < nt; ++t) {
                    const std::size_t lo = t * chunk;
                    const std::size_t hi = std::min(group.size(), lo + chunk);
                    if (lo >= hi) break;
                    pool.emplace_back([&, lo, hi]() {
                        for (std::size_t i = lo; i < hi; ++i)
                            moves[i] = update_vertex(group[i], local_tol);
                    });
                }
                for (auto& th : pool) th.join();
                for (double m : moves) max_move = std::max(max_move, m);
            }
        }
        double e_new = discrete_energy(map);
        report.energy_history.push_back(e_new);
        ++report.sweeps;
        report.max_move_last = max_move;
        last_move = std::max(max_move, 1e-13);

        bool accel_adopted = false;
        if (accel_failures < 3 && max_move >= schedule.tol) {
            double e_accel = e_new;
            if (global_descent_step(mesh, map, interior, e_accel)) {
                accel_adopted = e_new - e_accel > 1e-14 * (1.0 + e_new);
                e_new = e_accel;
                report.energy_history.push_back(e_new);
                accel_failures = 0;
            } else {
                ++accel_failures;
            }
        }

        const double rel_drop = (energy - e_new) / std::max(energy, 1e-300);
        energy = e_new;
        if (!accel_adopted && max_move < schedule.tol && rel_drop < 1e-12) {
            report.converged = true;
            break;
        }
    }
    report.final_energy = energy;
    for (std::size_t v = 0; v < n; ++v)
        if (flag[v]) report.flagged_vertices.push_back(static_cast<int>(v));
    if (target.kind != Target::Kind::Product) report.el_residual = el_residual(map);
    return {std::move(map), std::move(report)};
}

} // namespace

std::pair<DiscreteMap, SolveReport> solve_dirichlet(
    std::shared_ptr<const Mesh> mesh, const std::vector<MapValue>& boundary,
    const Target& target, const Schedule& schedule) {
    if (target.kind == Target::Kind::Region) {
        const ConvexRegion region(target.rho0);
        return run_solve(mesh, boundary, target, schedule, &region);
    }
    return run_solve(mesh, boundary, target, schedule, nullptr);
}

std::pair<DiscreteMap, SolveReport> solve_constrained(
    std::shared_ptr<const Mesh> mesh, const std::vector<MapValue>& boundary,
    const ConvexRegion& region, const Schedule& schedule) {
    std::vector<MapValue> projected = boundary;
    for (std::size_t v = 0; v < mesh->n_vertices(); ++v)
        if (mesh->boundary[v])
            projected[v].singular.front() =
                project_factor(region, projected[v].singular.front());
    return run_solve(mesh, projected, Target::region(region.rho0()), schedule,
                     &region);
}

std::pair<DiscreteMap, SolveReport> approximating_harmonic(
    const DiscreteMap& input, double radius, const Schedule& schedule,
    double* sup_distance) {
    const Mesh& mesh = *input.mesh;
    const std::size_t n = mesh.n_vertices();

    DiscreteMap map = input;
    SolveReport report;
    std::vector<int> interior;
    map.frozen.assign(n, 0);
    for (std::size_t v = 0; v < n; ++v) {
        const double r = std::hypot(mesh.vertices[v][0], mesh.vertices[v][1]);
        if (mesh.boundary[v] || r >= radius)
            map.frozen[v] = 1;
        else
            interior.push_back(static_cast<int>(v));
    }

    std::vector<char> flag(n, 0);
    double energy = discrete_energy(map);
    report.energy_history.push_back(energy);
    double last_move = std::numeric_limits<double>::infinity();
    for (int sweep = 0; sweep < schedule.max_sweeps; ++sweep) {
        const double local_tol = std::clamp(0.02 * last_move, 1e-14, 1e-9);
        double max_move = 0.0;
        for (int v : interior) {
            std::vector<MapValue> nvals;
            std::vector<double> w;
            for (const auto& nb : mesh.neighbors(v)) {
                if (nb.weight <= 0.0) continue;
                nvals.push_back(map.values[nb.vertex]);
                w.push_back(nb.weight);
            }
            if (nvals.empty()) continue;
            bool fl = false;
            const MapValue next =
                frechet_update(input.target, map.values[v], nvals, w,
                               schedule.damping, local_tol, &fl, nullptr);
            if (fl) flag[v] = 1;
            max_move = std::max(max_move, value_distance(map.values[v], next));
            map.values[v] = next;
        }
        const double e_new = discrete_energy(map);
        report.energy_history.push_back(e_new);
        ++report.sweeps;
        report.max_move_last = max_move;
        last_move = std::max(max_move, 1e-13);
        const double rel_drop = (energy - e_new) / std::max(energy, 1e-300);
        energy = e_new;
        if (max_move < schedule.tol && rel_drop < 1e-12) {
            report.converged = true;
            break;
        }
    }
    report.final_energy = energy;
    for (std::size_t v = 0; v < n; ++v)
        if (flag[v]) report.flagged_vertices.push_back(static_cast<int>(v));

    if (sup_distance) {
        double sup = 0.0;
        for (std::size_t v = 0; v < n; ++v) {
            const double r = std::hypot(mesh.vertices[v][0], mesh.vertices[v][1]);
            if (r <= radius)
                sup = std::max(sup,
                               value_distance(input.values[v], map.values[v]));
        }
        *sup_distance = sup;
    }
    return {std::move(map), std::move(report)};
}

std::pair<DiscreteMap, SolveReport> solve_product(
    std::shared_ptr<const Mesh> mesh, const std::vector<MapValue>& boundary,
    int j, int m, std::optional<double> kappa, const Schedule& schedule) {
    return solve_dirichlet(mesh, boundary, Target::product(j, m, kappa),
                           schedule);
}

double el_residual(const DiscreteMap& map, double radius) {
    const Mesh& mesh = *map.mesh;
    const std::size_t n = mesh.n_vertices();
    if (map.values.empty() || map.values[0].singular.empty())
        return std::numeric_limits<double>::quiet_NaN();

    std::vector<double> rho(n, 0.0), phi(n, 0.0);
    std::vector<char> ok(n, 1);
    for (std::size_t v = 0; v < n; ++v) {
        const GluedPoint& g = map.values[v].singular.front();
        if (g.is_basepoint()) {
            ok[v] = 0;
            continue;
        }
        rho[v] = g.point().rho();
        phi[v] = g.point().phi();
    }
    const auto grads = mesh.vertex_gradients(phi);

    double acc = 0.0;
    int count = 0;
    for (std::size_t v = 0; v < n; ++v) {
        if (mesh.boundary[v] || !ok[v]) continue;
        const double r = std::hypot(mesh.vertices[v][0], mesh.vertices[v][1]);
        if (r > radius) continue;
        bool stencil_ok = true;
        const int sheet = map.values[v].singular.front().sheet();
        for (const auto& nb : mesh.neighbors(v))
            if (!ok[nb.vertex] ||
                map.values[nb.vertex].singular.front().sheet() != sheet) {
                stencil_ok = false;
                break;
            }
        if (!stencil_ok) continue;
        double lap = 0.0;
        for (const auto& nb : mesh.neighbors(v))
            lap += nb.weight * (rho[nb.vertex] - rho[v]);
        lap /= mesh.vertex_area[v];
        const double g2 = grads[v][0] * grads[v][0] + grads[v][1] * grads[v][1];
        acc += std::fabs(rho[v] * lap - 3.0 * std::pow(rho[v], 6) * g2);
        ++count;
    }
    return count > 0 ? acc / count : std::numeric_limits<double>::quiet_NaN();
}

} // namespace wpharm

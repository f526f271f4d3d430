#include "wpharm/analysis.hpp"

#include "wpharm/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace wpharm {

namespace {

double sqr(double x) { return x * x; }

GluedPoint scale_glued(double lambda, const GluedPoint& g) {
    if (g.is_basepoint()) return g;
    return GluedPoint::on_sheet(g.sheet(), scale(lambda, g.point()));
}

// exact inside-fraction of the segment [a, b] against the disk of radius r
// about c
double segment_disk_fraction(const std::array<double, 3>& a,
                             const std::array<double, 3>& b,
                             std::array<double, 2> c, double r) {
    const double dx = b[0] - a[0], dy = b[1] - a[1];
    const double fx = a[0] - c[0], fy = a[1] - c[1];
    const double A = dx * dx + dy * dy;
    const double B = 2.0 * (fx * dx + fy * dy);
    const double C = fx * fx + fy * fy - r * r;
    if (A <= 0.0) return C <= 0.0 ? 1.0 : 0.0;
    const double disc = B * B - 4.0 * A * C;
    if (disc <= 0.0) return C <= 0.0 ? 1.0 : 0.0;
    const double sq = std::sqrt(disc);
    const double t0 = std::clamp((-B - sq) / (2.0 * A), 0.0, 1.0);
    const double t1 = std::clamp((-B + sq) / (2.0 * A), 0.0, 1.0);
    return std::max(0.0, t1 - t0);
}

} // namespace

GluedPoint MeshMap::at(double x, double y) const {
    const Mesh& mesh = *map_->mesh;
    const int t = mesh.locate(x, y);
    if (t < 0) {
        const int v = mesh.nearest_vertex(x, y);
        return map_->values[v].singular[factor_];
    }
    const auto l = mesh.barycentric(t, x, y);
    const auto& c = mesh.cells[t];
    const GluedPoint* g[3] = {&map_->values[c[0]].singular[factor_],
                              &map_->values[c[1]].singular[factor_],
                              &map_->values[c[2]].singular[factor_]};
    const bool chart_ok = !g[0]->is_basepoint() && !g[1]->is_basepoint() &&
                          !g[2]->is_basepoint() &&
                          g[0]->sheet() == g[1]->sheet() &&
                          g[0]->sheet() == g[2]->sheet();
    if (chart_ok) {
        const double rho = l[0] * g[0]->point().rho() +
                           l[1] * g[1]->point().rho() +
                           l[2] * g[2]->point().rho();
        const double phi = l[0] * g[0]->point().phi() +
                           l[1] * g[1]->point().phi() +
                           l[2] * g[2]->point().phi();
        if (rho > 0.0) return GluedPoint::on_sheet(g[0]->sheet(), rho, phi);
    }
    // mixed stencil: nearest corner wins
    int best = 0;
    for (int k = 1; k < 3; ++k)
        if (l[k] > l[best]) best = k;
    return *g[best];
}

DiscreteMap discretize(std::shared_ptr<const Mesh> mesh, const MapSource& u) {
    DiscreteMap map;
    map.mesh = mesh;
    map.target = Target::glued();
    map.values.reserve(mesh->n_vertices());
    map.frozen.assign(mesh->n_vertices(), 0);
    for (std::size_t v = 0; v < mesh->n_vertices(); ++v) {
        map.values.push_back(MapValue::glued(
            u.at(mesh->vertices[v][0], mesh->vertices[v][1])));
        map.frozen[v] = mesh->boundary[v];
    }
    return map;
}

EnergyProfile energy_profile(const DiscreteMap& map, std::array<double, 2> x0,
                             const std::vector<double>& radii, int samples) {
    const Mesh& mesh = *map.mesh;
    EnergyProfile out;
    out.radii = radii;
    out.c = mesh.metric_c;
    out.mesh_h = mesh.h;

    const MeshMap interp(map);
    const GluedPoint center = interp.at(x0[0], x0[1]);

    // Per-triangle energies (corner cotangents against the opposite edge):
    // clipping by the cell area fraction is consistent to O(h^2), whereas
    // clipping edges by their length fraction overestimates E(r) by O(h/r).
    std::vector<double> cell_energy(mesh.n_cells(), 0.0);
    if (mesh.dim == 2) {
        for (std::size_t t = 0; t < mesh.n_cells(); ++t) {
            const auto& c = mesh.cells[t];
            for (int k = 0; k < 3; ++k) {
                const int o = c[k], a = c[(k + 1) % 3], b = c[(k + 2) % 3];
                const auto& O = mesh.vertices[o];
                const auto& A = mesh.vertices[a];
                const auto& B = mesh.vertices[b];
                const double ux = A[0] - O[0], uy = A[1] - O[1];
                const double vx = B[0] - O[0], vy = B[1] - O[1];
                const double cross = std::fabs(ux * vy - uy * vx);
                const double cot =
                    (ux * vx + uy * vy) / std::max(cross, 1e-300);
                cell_energy[t] +=
                    0.5 * cot *
                    sqr(value_distance(map.values[a], map.values[b]));
            }
        }
    }

    for (double r : radii) {
        if (r < 3.0 * mesh.h) ++out.resolution_warnings;
        double E = 0.0;
        if (mesh.dim == 2) {
            for (std::size_t t = 0; t < mesh.n_cells(); ++t) {
                if (cell_energy[t] == 0.0) continue;
                const double frac = mesh.triangle_disk_fraction(
                    static_cast<int>(t), x0, r);
                if (frac > 0.0) E += frac * cell_energy[t];
            }
        } else {
            for (const auto& e : mesh.edges) {
                const double frac = segment_disk_fraction(
                    mesh.vertices[e.a], mesh.vertices[e.b], x0, r);
                if (frac <= 0.0) continue;
                E += frac * e.w *
                     sqr(value_distance(map.values[e.a], map.values[e.b]));
            }
        }
        // I(r): circle trace of d^2(u, u(x0))
        const CircleTrace trace = circle_trace_at(mesh, x0, r, samples);
        std::vector<double> vals(samples);
        for (int k = 0; k < samples; ++k) {
            const double th = 2.0 * M_PI * k / samples;
            const GluedPoint g = interp.at(x0[0] + r * std::cos(th),
                                           x0[1] + r * std::sin(th));
            vals[k] = sqr(distance_A(g, center));
        }
        const double I = integrate_circle(trace, vals);
        out.E.push_back(E);
        out.I.push_back(I);
    }

    const double n_plus_1 = mesh.dim + 1.0;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        const double r = radii[i];
        const double corr = std::exp(out.c * r * r);
        if (out.I[i] <= 1e-300) {
            out.ratio_corr.push_back(std::numeric_limits<double>::quiet_NaN());
            out.density_corr.push_back(0.0);
        } else {
            out.ratio_corr.push_back(corr * r * out.E[i] / out.I[i]);
            out.density_corr.push_back(corr * out.I[i] /
                                       std::pow(r, n_plus_1));
        }
    }
    double maxE = 0.0, maxI = 0.0;
    for (double e : out.E) maxE = std::max(maxE, e);
    for (double i : out.I) maxI = std::max(maxI, i);
    out.degenerate = (maxE < 1e-20 || maxI < 1e-20);
    return out;
}

namespace {

// two smallest usable radii for the extrapolation
bool pick_radii(const EnergyProfile& p, std::size_t& i1, std::size_t& i2) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < p.radii.size(); ++i)
        if (p.radii[i] >= 5.0 * p.mesh_h - 1e-12) idx.push_back(i);
    if (idx.size() < 2) return false;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return p.radii[a] < p.radii[b];
    });
    i1 = idx[0];
    i2 = idx[1];
    return true;
}

} // namespace

OrderResult order_at(const EnergyProfile& profile) {
    OrderResult out;
    if (profile.degenerate) {
        out.message = "degenerate profile";
        return out;
    }
    std::size_t i1 = 0, i2 = 0;
    if (!pick_radii(profile, i1, i2)) {
        out.message = "insufficient radii above 5h";
        return out;
    }
    // monotonicity of the corrected ratio over the usable radii; the slack
    // bounds each successive drop
    double prev = -1e300;
    for (std::size_t i = 0; i < profile.radii.size(); ++i) {
        if (profile.radii[i] < 5.0 * profile.mesh_h - 1e-12) continue;
        const double v = profile.ratio_corr[i];
        if (!std::isfinite(v)) continue;
        if (prev > -1e299 && v < prev * (1.0 - 1e-3)) {
            out.message = "corrected ratio not monotone";
            return out;
        }
        prev = v;
    }
    const double r1 = profile.radii[i1], r2 = profile.radii[i2];
    const double R1 = profile.ratio_corr[i1], R2 = profile.ratio_corr[i2];
    out.alpha = R1 - (R2 - R1) * r1 * r1 / (r2 * r2 - r1 * r1);
    out.ok = true;
    return out;
}

BetaResult beta_order(const EnergyProfile& profile, double C) {
    BetaResult out;
    if (profile.degenerate) {
        out.message = "degenerate profile";
        return out;
    }
    std::size_t i1 = 0, i2 = 0;
    if (!pick_radii(profile, i1, i2)) {
        out.message = "insufficient radii above 5h";
        return out;
    }
    auto ratio = [&](std::size_t i) {
        return std::exp(C * profile.radii[i]) * profile.radii[i] *
               profile.E[i] / profile.I[i];
    };
    const double r1 = profile.radii[i1], r2 = profile.radii[i2];
    const double R1 = ratio(i1), R2 = ratio(i2);
    out.beta = R1 - (R2 - R1) * r1 * r1 / (r2 * r2 - r1 * r1);
    out.ok = true;

    // re-verify the fitted-beta monotone quantities (domain dimension 2)
    const double n = 2.0;
    double worst = 0.0;
    double prevE = -1e300, prevI = -1e300;
    for (std::size_t i = 0; i < profile.radii.size(); ++i) {
        const double r = profile.radii[i];
        if (r < 5.0 * profile.mesh_h - 1e-12) continue;
        const double colE = std::exp(C * r) * profile.E[i] /
                            std::pow(r, n - 2.0 + 2.0 * out.beta);
        const double colI = std::exp(C * r) * profile.I[i] /
                            std::pow(r, n - 1.0 + 2.0 * out.beta);
        if (prevE > -1e299)
            worst = std::max(worst, (prevE - colE) / std::max(colE, 1e-300));
        if (prevI > -1e299)
            worst = std::max(worst, (prevI - colI) / std::max(colI, 1e-300));
        prevE = colE;
        prevI = colI;
    }
    out.monotonicity_defect = std::max(0.0, worst);
    return out;
}

EpsilonEnergy epsilon_energy(const DiscreteMap& map, std::array<double, 2> x,
                             double eps, int samples) {
    const Mesh& mesh = *map.mesh;
    EpsilonEnergy out;
    out.resolution_warning = eps < 3.0 * mesh.h;
    const MeshMap interp(map);
    const GluedPoint center = interp.at(x[0], x[1]);
    const CircleTrace trace = circle_trace_at(mesh, x, eps, samples);
    std::vector<double> vals(samples);
    for (int k = 0; k < samples; ++k) {
        const double th = 2.0 * M_PI * k / samples;
        const GluedPoint g =
            interp.at(x[0] + eps * std::cos(th), x[1] + eps * std::sin(th));
        vals[k] = sqr(distance_A(g, center));
    }
    const double integral = integrate_circle(trace, vals);
    out.raw = integral / (eps * eps * eps);
    out.normalized = out.raw / M_PI; // q_2 = int_{S^1} theta_1^2 dsigma = pi
    return out;
}

double lambda_factor(const MapSource& u, double sigma, int quad_samples) {
    const GluedPoint u0 = u.at(0.0, 0.0);
    double acc = 0.0;
    for (int k = 0; k < quad_samples; ++k) {
        const double th = 2.0 * M_PI * k / quad_samples;
        const GluedPoint g = u.at(sigma * std::cos(th), sigma * std::sin(th));
        acc += sqr(distance_A(g, u0));
    }
    const double I = acc * 2.0 * M_PI * sigma / quad_samples;
    if (I <= 1e-300)
        throw std::domain_error("lambda_factor: degenerate center");
    return 1.0 / std::sqrt(I / sigma); // n = 2: (sigma^{1-n} I)^{-1/2}
}

BlowupSequence blowup_sequence(const MapSource& u,
                               std::shared_ptr<const Mesh> mesh,
                               const std::vector<double>& sigmas,
                               int quad_samples) {
    BlowupSequence seq;
    seq.mesh = mesh;
    seq.sigmas = sigmas;
    const GluedPoint u0 = u.at(0.0, 0.0);
    for (double sigma : sigmas) {
        const double lambda = lambda_factor(u, sigma, quad_samples);
        seq.lambdas.push_back(lambda);
        seq.shifts.push_back(0.0);
        std::vector<GluedPoint> vals;
        vals.reserve(mesh->n_vertices());
        for (std::size_t v = 0; v < mesh->n_vertices(); ++v)
            vals.push_back(
                scale_glued(lambda, u.at(sigma * mesh->vertices[v][0],
                                         sigma * mesh->vertices[v][1])));
        seq.values.push_back(std::move(vals));

        // normalization identity and the half-radius factor, evaluated on
        // the rescaled map itself
        const GluedPoint c_scaled = scale_glued(lambda, u0);
        double acc1 = 0.0, acc_half = 0.0;
        for (int k = 0; k < quad_samples; ++k) {
            const double th = 2.0 * M_PI * k / quad_samples;
            const GluedPoint g1 = scale_glued(
                lambda, u.at(sigma * std::cos(th), sigma * std::sin(th)));
            const GluedPoint gh =
                scale_glued(lambda, u.at(0.5 * sigma * std::cos(th),
                                         0.5 * sigma * std::sin(th)));
            acc1 += sqr(distance_A(g1, c_scaled));
            acc_half += sqr(distance_A(gh, c_scaled));
        }
        seq.I1.push_back(acc1 * 2.0 * M_PI / quad_samples);
        const double I_half = acc_half * 2.0 * M_PI * 0.5 / quad_samples;
        seq.lambda_half.push_back(1.0 / std::sqrt(2.0 * I_half));
    }
    return seq;
}

BlowupSequence harmonic_blowup_sequence(const MapSource& u,
                                        std::shared_ptr<const Mesh> mesh,
                                        const std::vector<double>& sigmas,
                                        const Schedule& schedule,
                                        int quad_samples) {
    BlowupSequence seq = blowup_sequence(u, mesh, sigmas, quad_samples);
    const std::size_t n = mesh->n_vertices();
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        std::vector<MapValue> boundary(n, MapValue::basepoint());
        for (std::size_t v = 0; v < n; ++v)
            if (mesh->boundary[v])
                boundary[v] = MapValue::glued(seq.values[i][v]);
        const auto [solved, report] =
            solve_dirichlet(mesh, boundary, Target::model(), schedule);
        for (std::size_t v = 0; v < n; ++v)
            seq.values[i][v] = solved.values[v].singular.front();
    }
    return seq;
}

TangentStructure tangent_structure(const DiscreteMap& limit_map,
                                   double threshold, double delta_margin) {
    const Mesh& mesh = *limit_map.mesh;
    const std::size_t n = mesh.n_vertices();
    TangentStructure out;

    const int v0 = mesh.nearest_vertex(0.0, 0.0);
    const GluedPoint u0 = limit_map.values[v0].singular.front();
    out.f.resize(n);
    for (std::size_t v = 0; v < n; ++v)
        out.f[v] = distance_A(limit_map.values[v].singular.front(), u0);

    auto components_at = [&](double thr) {
        std::vector<int> comp(n, -1);
        int k = 0;
        for (std::size_t s = 0; s < n; ++s) {
            if (comp[s] >= 0 || out.f[s] <= thr) continue;
            std::vector<int> stack = {static_cast<int>(s)};
            comp[s] = k;
            while (!stack.empty()) {
                const int v = stack.back();
                stack.pop_back();
                for (const auto& nb : mesh.neighbors(v))
                    if (comp[nb.vertex] < 0 && out.f[nb.vertex] > thr) {
                        comp[nb.vertex] = k;
                        stack.push_back(nb.vertex);
                    }
            }
            ++k;
        }
        return std::pair<std::vector<int>, int>(std::move(comp), k);
    };

    auto [comp, k] = components_at(threshold);
    out.component = comp;
    out.k = k;

    // threshold stability: compute the neighboring candidate partitions and
    // flag disagreement instead of resolving it silently
    const auto lo = components_at(threshold * 0.75);
    const auto hi = components_at(threshold * 1.5);
    if (lo.second != k || hi.second != k) {
        out.unstable = true;
        out.message = "component count unstable under threshold scaling: " +
                      std::to_string(lo.second) + "/" + std::to_string(k) +
                      "/" + std::to_string(hi.second);
    }

    out.representative.assign(k, -1);
    for (std::size_t v = 0; v < n; ++v) {
        const int c = comp[v];
        if (c < 0) continue;
        if (out.representative[c] < 0 ||
            out.f[v] > out.f[out.representative[c]])
            out.representative[c] = static_cast<int>(v);
    }

    // partition A by the strict-inequality relation on representatives
    std::vector<int> parent(k);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    for (int a = 0; a < k; ++a)
        for (int b = a + 1; b < k; ++b) {
            const int xa = out.representative[a], xb = out.representative[b];
            const double d = distance_A(limit_map.values[xa].singular.front(),
                                        limit_map.values[xb].singular.front());
            const double gap = out.f[xa] + out.f[xb] - d;
            if (gap > delta_margin)
                parent[find(a)] = find(b);
            else if (gap > 0.5 * delta_margin) {
                out.unstable = true;
                out.message += " class relation in the margin band for pair " +
                               std::to_string(a) + "," + std::to_string(b);
            }
        }
    std::vector<int> root_ids;
    out.class_of.assign(k, -1);
    for (int a = 0; a < k; ++a) {
        const int r = find(a);
        auto it = std::find(root_ids.begin(), root_ids.end(), r);
        if (it == root_ids.end()) {
            root_ids.push_back(r);
            out.class_of[a] = static_cast<int>(root_ids.size()) - 1;
        } else {
            out.class_of[a] = static_cast<int>(it - root_ids.begin());
        }
    }
    out.n_classes = static_cast<int>(root_ids.size());

    // Homogeneity order by the radial two-point law: for probes x in the
    // components, alpha = log2( f(x) / f(x/2) ); the median over probes is
    // robust to the angular profile and to censoring near the zero set.
    {
        const MeshMap interp(limit_map);
        std::vector<double> est;
        for (std::size_t v = 0; v < n; ++v) {
            if (comp[v] < 0) continue;
            const double x = mesh.vertices[v][0], y = mesh.vertices[v][1];
            const double r = std::hypot(x, y);
            if (r < 0.5 || r > 0.9) continue;
            if (out.f[v] < 2.0 * threshold) continue;
            const GluedPoint half = interp.at(0.5 * x, 0.5 * y);
            const double fh = distance_A(half, u0);
            if (!(fh > 0.25 * threshold)) continue;
            est.push_back(std::log(out.f[v] / fh) / std::log(2.0));
        }
        if (!est.empty()) {
            std::nth_element(est.begin(), est.begin() + est.size() / 2,
                             est.end());
            out.alpha = est[est.size() / 2];
        }
    }
    return out;
}

std::vector<double> component_arcs(const DiscreteMap& limit_map,
                                   const TangentStructure& structure) {
    const Mesh& mesh = *limit_map.mesh;
    // when each sheet hosts exactly one component, rim vertices below the
    // component threshold can still be attributed by their sheet label
    std::vector<int> sheet_to_comp;
    bool by_sheet = true;
    for (int c = 0; c < structure.k && by_sheet; ++c) {
        const GluedPoint& g =
            limit_map.values[structure.representative[c]].singular.front();
        if (g.is_basepoint()) {
            by_sheet = false;
            break;
        }
        const int s = g.sheet();
        if (s >= static_cast<int>(sheet_to_comp.size()))
            sheet_to_comp.resize(s + 1, -1);
        if (sheet_to_comp[s] >= 0) by_sheet = false;
        sheet_to_comp[s] = c;
    }

    std::vector<std::vector<double>> angles(structure.k);
    for (std::size_t v = 0; v < mesh.n_vertices(); ++v) {
        const double r = std::hypot(mesh.vertices[v][0], mesh.vertices[v][1]);
        if (r < 1.0 - 2.0 * mesh.h) continue;
        int c = structure.component[v];
        if (c < 0 && by_sheet && structure.f[v] > 1e-12) {
            const GluedPoint& g = limit_map.values[v].singular.front();
            if (!g.is_basepoint() &&
                g.sheet() < static_cast<int>(sheet_to_comp.size()))
                c = sheet_to_comp[g.sheet()];
        }
        if (c < 0) continue;
        angles[c].push_back(
            std::atan2(mesh.vertices[v][1], mesh.vertices[v][0]));
    }
    std::vector<double> arcs(structure.k, 0.0);
    for (int c = 0; c < structure.k; ++c) {
        auto& a = angles[c];
        if (a.size() < 2) continue;
        std::sort(a.begin(), a.end());
        double largest_gap = 2.0 * M_PI - (a.back() - a.front());
        for (std::size_t i = 1; i < a.size(); ++i)
            largest_gap = std::max(largest_gap, a[i] - a[i - 1]);
        arcs[c] = 2.0 * M_PI - largest_gap;
    }
    return arcs;
}

PiecewiseReport piecewise_function_check(const DiscreteMap& limit_map,
                                         const TangentStructure& structure,
                                         double tolerance,
                                         int pairs_per_component) {
    const Mesh& mesh = *limit_map.mesh;
    PiecewiseReport out;
    out.tolerance = tolerance;

    std::vector<std::vector<int>> members(structure.k);
    for (std::size_t v = 0; v < mesh.n_vertices(); ++v)
        if (structure.component[v] >= 0)
            members[structure.component[v]].push_back(static_cast<int>(v));

    std::uint64_t state = 0x9e3779b97f4a7c15ull;
    auto next = [&state](std::size_t mod) {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        return static_cast<std::size_t>(state % mod);
    };

    auto value = [&](int v) -> const GluedPoint& {
        return limit_map.values[v].singular.front();
    };

    for (int c = 0; c < structure.k; ++c) {
        const auto& mem = members[c];
        if (mem.size() < 2) continue;
        for (int it = 0; it < pairs_per_component; ++it) {
            const int x = mem[next(mem.size())];
            const int y = mem[next(mem.size())];
            if (x == y) continue;
            const double d = distance_A(value(x), value(y));
            const double defect =
                std::fabs(d - std::fabs(structure.f[x] - structure.f[y]));
            out.max_within_defect = std::max(out.max_within_defect, defect);
            if (defect > tolerance) ++out.offending_pairs;

            // geodesic image: on sampled triples the largest pullback
            // distance equals the sum of the other two
            const int z = mem[next(mem.size())];
            if (z != x && z != y) {
                const double dxz = distance_A(value(x), value(z));
                const double dyz = distance_A(value(y), value(z));
                const double m = std::max({d, dxz, dyz});
                const double defect2 = std::fabs(2.0 * m - (d + dxz + dyz));
                out.max_collinear_defect =
                    std::max(out.max_collinear_defect, defect2);
            }
        }
    }

    // cross-class additivity through the basepoint
    for (int a = 0; a < structure.k; ++a)
        for (int b = a + 1; b < structure.k; ++b) {
            if (structure.class_of[a] == structure.class_of[b]) continue;
            const auto& ma = members[a];
            const auto& mb = members[b];
            if (ma.empty() || mb.empty()) continue;
            for (int it = 0; it < pairs_per_component; ++it) {
                const int x = ma[next(ma.size())];
                const int y = mb[next(mb.size())];
                const double d = distance_A(value(x), value(y));
                const double defect =
                    std::fabs(d - (structure.f[x] + structure.f[y]));
                out.max_cross_defect = std::max(out.max_cross_defect, defect);
                if (defect > tolerance) ++out.offending_pairs;
            }
        }
    return out;
}

namespace {

// representatives whose blow-up values stay interior for every sigma; on
// rejection the next-highest-f vertex of the component is taken
std::vector<int> valid_representatives(const BlowupSequence& seq,
                                       const TangentStructure& structure) {
    const std::size_t n = seq.mesh->n_vertices();
    std::vector<std::vector<int>> members(structure.k);
    for (std::size_t v = 0; v < n; ++v)
        if (structure.component[v] >= 0)
            members[structure.component[v]].push_back(static_cast<int>(v));
    std::vector<int> reps(structure.k, -1);
    for (int c = 0; c < structure.k; ++c) {
        auto mem = members[c];
        std::sort(mem.begin(), mem.end(), [&](int a, int b) {
            return structure.f[a] > structure.f[b];
        });
        for (int v : mem) {
            bool ok = true;
            for (const auto& vals : seq.values)
                if (vals[v].is_basepoint()) {
                    ok = false;
                    break;
                }
            if (ok) {
                reps[c] = v;
                break;
            }
        }
    }
    return reps;
}

} // namespace

BlowupSequence normalize_blowup(const BlowupSequence& seq,
                                const TangentStructure& structure) {
    BlowupSequence out = seq;
    const auto reps = valid_representatives(seq, structure);
    std::vector<int> usable;
    for (int r : reps)
        if (r >= 0) usable.push_back(r);
    if (usable.empty()) return out;

    for (std::size_t i = 0; i < seq.sigmas.size(); ++i) {
        double phi_min = 1e300, phi_max = -1e300;
        for (int v : usable) {
            const double p = seq.values[i][v].point().phi();
            phi_min = std::min(phi_min, p);
            phi_max = std::max(phi_max, p);
        }
        const double c = 0.5 * (phi_max + phi_min);
        out.shifts[i] = c;
        for (auto& g : out.values[i]) {
            if (g.is_basepoint()) continue;
            g = GluedPoint::on_sheet(g.sheet(), g.point().rho(),
                                     g.point().phi() - c);
        }
    }
    return out;
}

PullbackMatrices pullback_matrix(const BlowupSequence& seq, int max_samples,
                                 bool midpoints) {
    const Mesh& mesh = *seq.mesh;
    PullbackMatrices out;
    std::vector<int> inside;
    for (std::size_t v = 0; v < mesh.n_vertices(); ++v)
        if (std::hypot(mesh.vertices[v][0], mesh.vertices[v][1]) <= 0.95)
            inside.push_back(static_cast<int>(v));
    const std::size_t stride = std::max<std::size_t>(
        1, inside.size() / std::max(1, max_samples));
    for (std::size_t i = 0; i < inside.size(); i += stride)
        out.sample_vertices.push_back(inside[i]);

    const std::size_t ns = out.sample_vertices.size();
    const std::size_t n_mid = midpoints ? std::min<std::size_t>(ns, 12) : 0;

    for (std::size_t s = 0; s < seq.sigmas.size(); ++s) {
        std::vector<GluedPoint> pts;
        pts.reserve(ns + n_mid * (n_mid - 1) / 2);
        for (int v : out.sample_vertices) pts.push_back(seq.values[s][v]);
        for (std::size_t a = 0; a < n_mid; ++a)
            for (std::size_t b = a + 1; b < n_mid; ++b)
                pts.push_back(glued_geodesic_point(pts[a], pts[b], 0.5));
        const std::size_t m = pts.size();
        std::vector<std::vector<double>> D(m, std::vector<double>(m, 0.0));
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = a + 1; b < m; ++b)
                D[a][b] = D[b][a] = distance_A(pts[a], pts[b]);
        out.per_sigma.push_back(std::move(D));
    }
    for (std::size_t s = 1; s < out.per_sigma.size(); ++s) {
        const auto& A = out.per_sigma[s - 1];
        const auto& B = out.per_sigma[s];
        const std::size_t m = std::min(A.size(), B.size());
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = 0; b < m; ++b)
                out.max_cauchy_defect = std::max(
                    out.max_cauchy_defect, std::fabs(A[a][b] - B[a][b]));
    }
    return out;
}

std::vector<CombCurve> comb_construction(const BlowupSequence& normalized,
                                         const TangentStructure& structure,
                                         double restrict_radius,
                                         int max_pair_samples) {
    const Mesh& mesh = *normalized.mesh;
    std::vector<CombCurve> out;
    const auto reps = valid_representatives(normalized, structure);

    std::vector<int> comps;
    for (int c = 0; c < structure.k; ++c)
        if (reps[c] >= 0) comps.push_back(c);

    std::vector<int> region_vertices;
    for (std::size_t v = 0; v < mesh.n_vertices(); ++v)
        if (std::hypot(mesh.vertices[v][0], mesh.vertices[v][1]) <=
            restrict_radius)
            region_vertices.push_back(static_cast<int>(v));

    for (std::size_t i = 0; i < normalized.sigmas.size(); ++i) {
        CombCurve comb;
        comb.sigma = normalized.sigmas[i];
        if (comps.size() < 2 || structure.n_classes < 2) {
            comb.defined = false;
            comb.message = "comb undefined: fewer than two classes";
            out.push_back(comb);
            continue;
        }
        std::vector<std::pair<double, int>> phis; // (phi, component)
        for (int c : comps)
            phis.push_back({normalized.values[i][reps[c]].point().phi(), c});
        std::sort(phis.begin(), phis.end());
        const double phi_bar = 0.5 * (phis.back().first - phis.front().first);
        comb.phi_bar = phi_bar;
        if (!(phi_bar > 0.0)) {
            comb.defined = false;
            comb.message = "comb undefined: no phi spread";
            out.push_back(comb);
            continue;
        }
        // the symmetric geodesic through (1, -phi_bar) and (1, +phi_bar)
        double lo = 1e-9, hi = 1.0 - 1e-12;
        if (symmetric_phi_at_rho(lo, 1.0) < phi_bar) {
            comb.defined = false;
            comb.message = "comb undefined: phi spread too large";
            out.push_back(comb);
            continue;
        }
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (symmetric_phi_at_rho(mid, 1.0) > phi_bar)
                lo = mid;
            else
                hi = mid;
        }
        comb.rho_sigma = 0.5 * (lo + hi);

        // teeth anchored at the interior representatives
        const double phi_inf = cstar() / sqr(comb.rho_sigma);
        for (std::size_t m = 1; m + 1 < phis.size(); ++m) {
            const double pm = phis[m].first;
            if (std::fabs(pm) >= phi_inf) continue;
            comb.tooth_rho.push_back(
                symmetric_rho_at_phi(comb.rho_sigma, std::fabs(pm)));
            comb.tooth_phi.push_back(pm);
        }

        // the comparison map L: component m -> (f(x), phi_m), zero set -> P0
        std::vector<double> comp_phi(structure.k,
                                     std::numeric_limits<double>::quiet_NaN());
        for (int c : comps)
            comp_phi[c] = normalized.values[i][reps[c]].point().phi();
        auto L_at = [&](int v) -> GluedPoint {
            const int c = structure.component[v];
            if (c < 0 || !(structure.f[v] > 0.0) || !std::isfinite(comp_phi[c]))
                return GluedPoint::basepoint();
            return GluedPoint::on_sheet(0, structure.f[v], comp_phi[c]);
        };

        double sup_point = 0.0;
        for (int v : region_vertices)
            sup_point = std::max(
                sup_point, distance_A(normalized.values[i][v], L_at(v)));
        comb.sup_point_defect = sup_point;

        std::uint64_t state = 0xdeadbeef12345ull;
        auto next = [&state](std::size_t mod) {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            return static_cast<std::size_t>(state % mod);
        };
        double sup_pair = 0.0;
        for (int it = 0; it < max_pair_samples; ++it) {
            const int x = region_vertices[next(region_vertices.size())];
            const int y = region_vertices[next(region_vertices.size())];
            if (x == y) continue;
            const double du =
                distance_A(normalized.values[i][x], normalized.values[i][y]);
            const double dl = distance_A(L_at(x), L_at(y));
            sup_pair = std::max(sup_pair, std::fabs(du - dl));
        }
        comb.sup_pair_defect = sup_pair;

        const double S = symmetric_arclength_at_rho(comb.rho_sigma, 6.0);
        auto dist_to_comb = [&](const GluedPoint& g) {
            if (g.is_basepoint()) return comb.rho_sigma;
            const ModelPoint p = g.point();
            // d(p, gamma(s)) is convex in s, so golden-section is exact
            double a = -S, b = S;
            const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
            double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
            auto ev = [&](double s) {
                return distance(
                    p, symmetric_point_at_arclength(comb.rho_sigma, s));
            };
            double f1 = ev(x1), f2 = ev(x2);
            for (int it = 0; it < 60; ++it) {
                if (f1 < f2) {
                    b = x2; x2 = x1; f2 = f1;
                    x1 = b - gr * (b - a);
                    f1 = ev(x1);
                } else {
                    a = x1; x1 = x2; f1 = f2;
                    x2 = a + gr * (b - a);
                    f2 = ev(x2);
                }
            }
            double best = std::min(f1, f2);
            for (std::size_t tm = 0; tm < comb.tooth_rho.size(); ++tm) {
                double ta = comb.tooth_rho[tm];
                double tb = std::max(p.rho() + best, ta) + 1.0;
                double y1 = tb - gr * (tb - ta), y2 = ta + gr * (tb - ta);
                auto evt = [&](double t) {
                    return distance(
                        p, ModelPoint::interior(t, comb.tooth_phi[tm]));
                };
                double h1 = evt(y1), h2 = evt(y2);
                for (int it = 0; it < 60; ++it) {
                    if (h1 < h2) {
                        tb = y2; y2 = y1; h2 = h1;
                        y1 = tb - gr * (tb - ta);
                        h1 = evt(y1);
                    } else {
                        ta = y1; y1 = y2; h1 = h2;
                        y2 = ta + gr * (tb - ta);
                        h2 = evt(y2);
                    }
                }
                best = std::min({best, h1, h2});
            }
            return best;
        };
        double sup_comb = 0.0;
        for (int v : region_vertices)
            sup_comb =
                std::max(sup_comb, dist_to_comb(normalized.values[i][v]));
        comb.sup_comb_defect = sup_comb;
        out.push_back(comb);
    }
    return out;
}

double probe_mean_value_constant(const Mesh& mesh) {
    // nonnegative subharmonic test family: squared distances to shifted
    // centers plus a positive harmonic function
    std::vector<std::vector<double>> family;
    const std::size_t n = mesh.n_vertices();
    for (double ax : {-0.6, -0.2, 0.0, 0.3, 0.7})
        for (double ay : {-0.5, 0.0, 0.4}) {
            std::vector<double> f(n);
            for (std::size_t v = 0; v < n; ++v)
                f[v] = sqr(mesh.vertices[v][0] - ax) +
                       sqr(mesh.vertices[v][1] - ay);
            family.push_back(std::move(f));
        }
    {
        std::vector<double> f(n);
        for (std::size_t v = 0; v < n; ++v)
            f[v] = std::exp(mesh.vertices[v][0]) *
                   std::cos(std::min(1.0, std::fabs(mesh.vertices[v][1])));
        family.push_back(std::move(f));
    }
    double c1 = 0.0;
    for (const auto& f : family) {
        double sup_half = 0.0, integral = 0.0;
        for (std::size_t v = 0; v < n; ++v) {
            const double r =
                std::hypot(mesh.vertices[v][0], mesh.vertices[v][1]);
            if (r <= 0.5) sup_half = std::max(sup_half, f[v]);
            if (r <= 5.0 / 8.0) integral += f[v] * mesh.vertex_area[v];
        }
        if (integral > 1e-12) c1 = std::max(c1, sup_half / integral);
    }
    return c1;
}

double tightest_region(const DiscreteMap& map, double restrict_radius) {
    const Mesh& mesh = *map.mesh;
    double q_min = 1e300;
    for (std::size_t v = 0; v < mesh.n_vertices(); ++v) {
        if (std::hypot(mesh.vertices[v][0], mesh.vertices[v][1]) >
            restrict_radius)
            continue;
        const GluedPoint& g = map.values[v].singular.front();
        if (g.is_basepoint()) return 0.0;
        const ModelPoint p = g.point();
        // p is in H[q] iff |phi| < phi_inf(q) and rho >= gamma_rho(q, |phi|);
        // both fail monotonically as q grows
        double lo = 0.0, hi = 2.0 * p.rho();
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            const bool inside =
                std::fabs(p.phi()) < cstar() / (mid * mid) &&
                p.rho() >=
                    symmetric_rho_at_phi(mid, std::fabs(p.phi())) *
                        (1.0 - 1e-13);
            if (inside)
                lo = mid;
            else
                hi = mid;
        }
        q_min = std::min(q_min, lo);
    }
    return q_min >= 1e300 ? 0.0 : q_min;
}

ContainmentReport containment_experiment(const MapSource& base,
                                         const MapSource& limit,
                                         const ContainmentParams& params) {
    ContainmentReport out;
    auto mesh = std::make_shared<const Mesh>(build_disk_mesh(params.mesh_h));
    const std::size_t n = mesh->n_vertices();

    const DiscreteMap limit_map = discretize(mesh, limit);
    double fmax = 0.0;
    {
        const int v0 = mesh->nearest_vertex(0.0, 0.0);
        for (std::size_t v = 0; v < n; ++v)
            fmax = std::max(
                fmax, distance_A(limit_map.values[v].singular.front(),
                                 limit_map.values[v0].singular.front()));
    }
    const TangentStructure structure = tangent_structure(
        limit_map, std::max(0.05, 3.0 * params.mesh_h) * fmax, 1e-8);

    std::vector<double> sigmas;
    for (int k = 0; k <= params.k_max; ++k)
        sigmas.push_back(params.sigma0 / std::pow(2.0, k));
    const BlowupSequence seq = normalize_blowup(
        blowup_sequence(base, mesh, sigmas, params.quad_samples), structure);
    const auto combs = comb_construction(seq, structure);
    const int comb_idx =
        params.rho0_comb_index < 0
            ? static_cast<int>(combs.size()) - 1
            : std::min(params.rho0_comb_index,
                       static_cast<int>(combs.size()) - 1);
    if (combs.empty() || !combs[comb_idx].defined) {
        out.message = "comb undefined at the region-fixing sigma";
        out.truncated = true;
        return out;
    }
    out.rho0 = params.rho0_override > 0.0 ? params.rho0_override
                                          : combs[comb_idx].rho_sigma;
    const ConvexRegion region(out.rho0 / 2.0);

    // center obstruction on the synthetic fixture: u_k(0) = P0 exactly
    out.center_obstruction = region.distance_to(ModelPoint::basepoint());

    out.c1 = probe_mean_value_constant(*mesh);

    double c2 = 0.0;
    double prev_sup = 0.0;
    for (std::size_t kidx = 0; kidx < sigmas.size(); ++kidx) {
        ContainmentStep step;
        step.sigma = sigmas[kidx];
        step.rho_sigma = combs[kidx].defined ? combs[kidx].rho_sigma : 0.0;

        std::vector<MapValue> boundary(n, MapValue::basepoint());
        for (std::size_t v = 0; v < n; ++v)
            if (mesh->boundary[v])
                boundary[v] = MapValue::glued(seq.values[kidx][v]);
        const auto [solved, report] =
            solve_dirichlet(mesh, boundary, Target::model(), params.schedule);

        double sup = 0.0, outside = 0.0;
        for (std::size_t v = 0; v < n; ++v) {
            const GluedPoint& g = solved.values[v].singular.front();
            const ModelPoint p =
                g.is_basepoint() ? ModelPoint::basepoint() : g.point();
            const bool in_R =
                std::hypot(mesh->vertices[v][0], mesh->vertices[v][1]) <=
                params.R;
            const bool inside_region =
                !g.is_basepoint() && region.contains(p).inside;
            if (in_R) sup = std::max(sup, region.distance_to(p));
            if (!inside_region) outside += mesh->vertex_area[v];
        }
        step.sup_distance = sup;
        step.outside_measure = outside;
        step.decay_factor = (kidx > 0 && sup > 0.0) ? prev_sup / sup : 0.0;
        prev_sup = sup;

        step.inclusion_ok = true;
        for (std::size_t v = 0; v < n; ++v) {
            const bool in_R =
                std::hypot(mesh->vertices[v][0], mesh->vertices[v][1]) <=
                params.R;
            if (!in_R) continue;
            const GluedPoint& g = seq.values[kidx][v];
            const double d_to_p0 = g.is_basepoint() ? 0.0 : g.point().rho();
            if (d_to_p0 < params.r && !(structure.f[v] < 2.0 * params.r)) {
                step.inclusion_ok = false;
                break;
            }
        }

        if (step.rho_sigma > 0.0 && step.rho_sigma < params.r) {
            const GapResult gap = gamma_gap(step.rho_sigma, params.r, 60);
            step.gap_value = gap.value;
            step.gap_ok = gap.value > 0.5 * params.r;
        } else {
            step.gap_ok = false;
            out.truncated = true;
        }
        c2 = std::max(c2, seq.lambda_half[kidx]);
        out.steps.push_back(step);
    }
    out.c2 = c2;
    out.eps_admissible = 3.0 / (64.0 * std::max(out.c1, 1e-300) * c2 * c2);
    out.eps_used = out.eps_admissible * 0.9;
    return out;
}

// ---------------------------------------------------------------------------
// fixtures
// ---------------------------------------------------------------------------

AnalyticMap fixture_line_map(double offset, double slope) {
    return AnalyticMap([offset, slope](double x, double) {
        return GluedPoint::on_sheet(0, offset + slope * x, 0.0);
    });
}

AnalyticMap fixture_two_sheet_homogeneous(double a, double b) {
    return AnalyticMap([a, b](double x, double y) {
        if (x == 0.0) return GluedPoint::basepoint();
        const double r2 = x * x + y * y;
        const double s = x > 0.0 ? 1.0 : -1.0;
        return GluedPoint::on_sheet(0, a * std::fabs(x), s * b / r2);
    });
}

AnalyticMap fixture_two_sheet_perturbed(double a, double b, double c1,
                                        double c2) {
    // rho carries a zero-mean angular modulation (orthogonal to cos^2, so
    // the normalization feedback is second order) that decays under
    // blow-up; phi widens slowly so the cross-sheet additivity defect also
    // decays. All three comb suprema then decrease across sigma halvings.
    return AnalyticMap([a, b, c1, c2](double x, double y) {
        if (x == 0.0) return GluedPoint::basepoint();
        const double r = std::hypot(x, y);
        const double th = std::atan2(y, x);
        const double s = x > 0.0 ? 1.0 : -1.0;
        const double rho =
            a * std::fabs(x) * (1.0 + c1 * r * std::cos(4.0 * th));
        if (rho <= 0.0) return GluedPoint::basepoint();
        const double phi = s * b * std::pow(r, -2.0 - c2);
        return GluedPoint::on_sheet(0, rho, phi);
    });
}

AnalyticMap fixture_two_sheet_widening(double a, double b, double delta) {
    // on the rim |x| = 1 the phi trace is constant per sheet, which is what
    // makes the solved family flatten within sheets
    return AnalyticMap([a, b, delta](double x, double y) {
        if (x == 0.0) return GluedPoint::basepoint();
        const double r = std::hypot(x, y);
        const double s = x > 0.0 ? 1.0 : -1.0;
        return GluedPoint::on_sheet(0, a * std::fabs(x),
                                    s * b * std::pow(r, -2.0 - delta));
    });
}

AnalyticMap fixture_glued_tangent(double alpha, std::array<double, 2> e,
                                  double scale_factor) {
    return AnalyticMap([alpha, e, scale_factor](double x, double y) {
        const double t = x * e[0] + y * e[1];
        if (t == 0.0) return GluedPoint::basepoint();
        const int sheet = t > 0.0 ? 0 : 1;
        return GluedPoint::on_sheet(
            sheet, scale_factor * std::pow(std::fabs(t), alpha), 0.0);
    });
}

AnalyticMap fixture_folded_line(double slope) {
    return AnalyticMap([slope](double x, double) {
        if (x == 0.0) return GluedPoint::basepoint();
        return GluedPoint::on_sheet(0, slope * std::fabs(x), 0.0);
    });
}

namespace {

// sector index and angular offset from the sector center
int sector_of(double x, double y, double& xi) {
    double th = std::atan2(y, x);
    if (th < 0.0) th += 2.0 * M_PI;
    int j = static_cast<int>(th / (2.0 * M_PI / 3.0));
    j = std::min(j, 2);
    const double center = (j + 0.5) * (2.0 * M_PI / 3.0);
    xi = th - center;
    return j;
}

} // namespace

AnalyticMap fixture_three_sector(double a, double b, double delta) {
    return AnalyticMap([a, b, delta](double x, double y) {
        const double r = std::hypot(x, y);
        if (r == 0.0) return GluedPoint::basepoint();
        double xi = 0.0;
        const int j = sector_of(x, y, xi);
        const double rho = a * r * std::cos(1.5 * xi);
        if (rho <= 1e-14) return GluedPoint::basepoint();
        const double s = static_cast<double>(j - 1); // -1, 0, +1
        const double phi = s * b * std::pow(r, -2.0 - delta);
        return GluedPoint::on_sheet(0, rho, phi);
    });
}

AnalyticMap fixture_glued_three_sector(double scale_factor) {
    return AnalyticMap([scale_factor](double x, double y) {
        const double r = std::hypot(x, y);
        if (r == 0.0) return GluedPoint::basepoint();
        double xi = 0.0;
        const int j = sector_of(x, y, xi);
        const double rho = scale_factor * r * std::cos(1.5 * xi);
        if (rho <= 1e-14) return GluedPoint::basepoint();
        return GluedPoint::on_sheet(j, rho, 0.0);
    });
}

} // namespace wpharm

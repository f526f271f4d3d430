#include <doctest.h>

#include "support/oracles.hpp"
#include "wpharm/solver.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

using namespace wpharm;

namespace {

std::shared_ptr<const Mesh> shared_disk(double h) {
    return std::make_shared<const Mesh>(build_disk_mesh(h));
}

// boundary data rho = 2 + cos(theta), phi = 0 (geodesic-line fixture)
std::vector<MapValue> line_fixture_boundary(const Mesh& mesh) {
    std::vector<MapValue> b(mesh.n_vertices(), MapValue::model(1.0, 0.0));
    for (std::size_t v = 0; v < mesh.n_vertices(); ++v)
        if (mesh.boundary[v])
            b[v] = MapValue::model(2.0 + mesh.vertices[v][0], 0.0);
    return b;
}

} // namespace

TEST_CASE("discrete energy basics") {
    // hand-built two-vertex graph with one unit edge
    auto tiny = std::make_shared<Mesh>();
    tiny->dim = 2;
    tiny->h = 1.0;
    tiny->vertices = {{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
    tiny->edges = {{0, 1, 1.0}};
    tiny->boundary = {1, 1};
    tiny->finalize();
    DiscreteMap map;
    map.mesh = tiny;
    map.target = Target::model();
    map.values = {MapValue::model(1.0, 0.0), MapValue::model(3.0, 0.0)};
    map.frozen = {1, 1};
    CHECK(discrete_energy(map) == doctest::Approx(4.0));

    // constant map on a disk
    const auto mesh = shared_disk(0.2);
    DiscreteMap cmap;
    cmap.mesh = mesh;
    cmap.target = Target::model();
    cmap.values.assign(mesh->n_vertices(), MapValue::model(1.3, 0.7));
    cmap.frozen.assign(mesh->n_vertices(), 0);
    CHECK(discrete_energy(cmap) == doctest::Approx(0.0));
}

TEST_CASE("discrete energy of the geodesic-line map equals the scalar energy") {
    const auto mesh = shared_disk(0.05);
    DiscreteMap map;
    map.mesh = mesh;
    map.target = Target::model();
    map.frozen.assign(mesh->n_vertices(), 0);
    for (std::size_t v = 0; v < mesh->n_vertices(); ++v)
        map.values.push_back(
            MapValue::model(2.0 + mesh->vertices[v][0], 0.0));
    // image in a horizontal geodesic: energy = Dirichlet energy of x
    CHECK(discrete_energy(map) == doctest::Approx(M_PI).epsilon(0.01));
}

TEST_CASE("frechet update: closed forms") {
    const Target t = Target::model();
    const MapValue q = MapValue::model(1.7, -0.4);
    MapValue r = frechet_update(t, MapValue::model(1.0, 0.0), {q, q, q},
                                {1.0, 2.0, 0.5});
    CHECK(distance_A(r.factor(), q.factor()) < 1e-10);

    // two-point mean on the horizontal geodesic
    r = frechet_update(t, MapValue::model(1.5, 0.0),
                       {MapValue::model(1.0, 0.0), MapValue::model(3.0, 0.0)},
                       {1.0, 1.0});
    CHECK(r.factor().point().rho() == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(std::fabs(r.factor().point().phi()) < 1e-10);

    CHECK_THROWS_AS(frechet_update(t, q, {q}, {0.0}), std::domain_error);
}

TEST_CASE("frechet update: near-basepoint competition") {
    // neighbors with tiny rho and a huge phi gap: the minimizer sits within
    // O(eps) of P0; brute-force grid oracle for the interior value
    const double eps = 0.01, M = 1e4;
    const Target t = Target::model();
    const std::vector<MapValue> nbrs = {MapValue::model(eps, -M),
                                        MapValue::model(eps, M)};
    const MapValue r =
        frechet_update(t, MapValue::model(eps, 0.0), nbrs, {1.0, 1.0});
    const double d_to_p0 = distance_A(r.factor(), GluedPoint::basepoint());
    CHECK(d_to_p0 <= 2.0 * eps);

    const auto oracle = oracles::grid_minimize(
        [&](double rho, double phi) {
            const MapValue p = MapValue::model(rho, phi);
            double f = 0.0;
            for (const auto& q : nbrs) {
                const double d = value_distance(p, q);
                f += d * d;
            }
            return f;
        },
        1e-4, 3 * eps, -2.0, 2.0, 160);
    double f_r = 0.0;
    for (const auto& q : nbrs) f_r += std::pow(value_distance(r, q), 2);
    CHECK(f_r <= oracle.value * (1.0 + 1e-6));
}

TEST_CASE("solve: geodesic-line fixture matches the scalar oracle") {
    const auto mesh = shared_disk(0.05);
    const auto boundary = line_fixture_boundary(*mesh);
    Schedule sched;
    sched.tol = 1e-10;
    const auto [map, report] = solve_dirichlet(mesh, boundary, Target::model(), sched);
    CHECK(report.converged);

    std::vector<double> b(mesh->n_vertices(), 0.0);
    for (std::size_t v = 0; v < mesh->n_vertices(); ++v)
        if (mesh->boundary[v]) b[v] = 2.0 + mesh->vertices[v][0];
    const auto oracle = scalar_harmonic(*mesh, b);

    double sup = 0.0;
    for (std::size_t v = 0; v < mesh->n_vertices(); ++v) {
        const auto& g = map.values[v].factor();
        REQUIRE(!g.is_basepoint());
        sup = std::max(sup, std::fabs(g.point().rho() - oracle[v]));
        sup = std::max(sup, std::fabs(g.point().phi()));
    }
    CHECK(sup < 1e-2);
    CHECK(discrete_energy(map) == doctest::Approx(M_PI).epsilon(0.02));

    // energy history non-increasing within slack
    for (std::size_t i = 1; i < report.energy_history.size(); ++i)
        CHECK(report.energy_history[i] <=
              report.energy_history[i - 1] + 1e-12);
}

TEST_CASE("solve: constant boundary gives the constant map") {
    const auto mesh = shared_disk(0.2);
    std::vector<MapValue> boundary(mesh->n_vertices(),
                                   MapValue::model(1.5, 0.3));
    const auto [map, report] = solve_dirichlet(mesh, boundary, Target::model());
    CHECK(report.converged);
    CHECK(report.final_energy == doctest::Approx(0.0));
    for (const auto& v : map.values)
        CHECK(distance_A(v.factor(),
                         GluedPoint::on_sheet(0, 1.5, 0.3)) < 1e-12);
}

TEST_CASE("solve: parallel mode matches sequential") {
    const auto mesh = shared_disk(0.1);
    const auto boundary = line_fixture_boundary(*mesh);
    Schedule seq;
    seq.tol = 1e-9;
    Schedule par = seq;
    par.mode = Schedule::Mode::Parallel;
    par.threads = 4;
    const auto [m1, r1] = solve_dirichlet(mesh, boundary, Target::model(), seq);
    const auto [m2, r2] = solve_dirichlet(mesh, boundary, Target::model(), par);
    CHECK(std::fabs(r1.final_energy - r2.final_energy) <= 10.0 * seq.tol);
    double sup = 0.0;
    for (std::size_t v = 0; v < mesh->n_vertices(); ++v)
        sup = std::max(sup, value_distance(m1.values[v], m2.values[v]));
    CHECK(sup <= 1e-6);
}

TEST_CASE("constrained solve stays in the region") {
    const auto mesh = shared_disk(0.1);
    const double rho0 = 0.5;
    const ConvexRegion region(rho0);

    // boundary deep inside the region: projection inactive, agrees with the
    // unconstrained solve
    std::vector<MapValue> deep(mesh->n_vertices(), MapValue::model(1.0, 0.0));
    for (std::size_t v = 0; v < mesh->n_vertices(); ++v)
        if (mesh->boundary[v])
            deep[v] = MapValue::model(3.0 + mesh->vertices[v][0], 0.0);
    Schedule sched;
    sched.tol = 1e-9;
    const auto [mc, rc] = solve_constrained(mesh, deep, region, sched);
    const auto [mu, ru] = solve_dirichlet(mesh, deep, Target::model(), sched);
    CHECK(rc.converged);
    double sup = 0.0;
    for (std::size_t v = 0; v < mesh->n_vertices(); ++v)
        sup = std::max(sup, value_distance(mc.values[v], mu.values[v]));
    CHECK(sup < 1e-6);

    // boundary on the curve itself: the whole image must stay in H[rho0]
    std::vector<MapValue> on_curve(mesh->n_vertices(),
                                   MapValue::model(rho0, 0.0));
    for (std::size_t v = 0; v < mesh->n_vertices(); ++v)
        if (mesh->boundary[v]) {
            const double th =
                std::atan2(mesh->vertices[v][1], mesh->vertices[v][0]);
            const double s = 2.0 * std::sin(th);
            const ModelPoint g = symmetric_point_at_arclength(rho0, s);
            on_curve[v] = MapValue::model(g);
        }
    const auto [mg, rg] = solve_constrained(mesh, on_curve, region, sched);
    for (std::size_t v = 0; v < mesh->n_vertices(); ++v) {
        const auto& g = mg.values[v].factor();
        REQUIRE(!g.is_basepoint());
        const auto res = region.contains(g.point(), 1e-7);
        const bool ok =
            res.inside || res.borderline || region.distance_to(g.point()) < 1e-6;
        CHECK(ok);
    }
}

TEST_CASE("approximating harmonic maps") {
    const auto mesh = shared_disk(0.1);
    const auto boundary = line_fixture_boundary(*mesh);
    Schedule sched;
    sched.tol = 1e-10;
    const auto [map, rep] = solve_dirichlet(mesh, boundary, Target::model(), sched);

    // a solver fixed point replaces to itself
    double sup = 0.0;
    const auto [w, wrep] = approximating_harmonic(map, 0.8, sched, &sup);
    CHECK(sup < 1e-7);

    // perturb one interior vertex by delta in d: the replacement reverts it
    DiscreteMap perturbed = map;
    int pick = -1;
    for (std::size_t v = 0; v < mesh->n_vertices(); ++v) {
        const auto& x = mesh->vertices[v];
        if (!mesh->boundary[v] && std::hypot(x[0], x[1]) < 0.3) {
            pick = static_cast<int>(v);
            break;
        }
    }
    REQUIRE(pick >= 0);
    const double delta = 0.05;
    const ModelPoint old_pt = perturbed.values[pick].factor().point();
    perturbed.values[pick] =
        MapValue::model(old_pt.rho() + delta, old_pt.phi());
    double sup2 = 0.0;
    const auto [w2, wrep2] = approximating_harmonic(perturbed, 0.8, sched, &sup2);
    CHECK(sup2 <= delta + 1e-6);
    CHECK(sup2 >= delta * 0.5);
}

TEST_CASE("product solves") {
    const auto mesh = shared_disk(0.1);
    const std::size_t n = mesh->n_vertices();

    // m = 0: pure linear solve matching the scalar extension per coordinate
    std::vector<MapValue> b0(n);
    for (std::size_t v = 0; v < n; ++v) {
        b0[v].regular = {0.0, 0.0};
        if (mesh->boundary[v])
            b0[v].regular = {mesh->vertices[v][0] * 2.0,
                             mesh->vertices[v][1] - 0.5};
    }
    const auto [mp, rp] = solve_product(mesh, b0, 1, 0);
    CHECK(rp.converged);
    for (std::size_t v = 0; v < n; ++v) {
        CHECK(mp.values[v].regular[0] ==
              doctest::Approx(2.0 * mesh->vertices[v][0]).epsilon(1e-8));
        CHECK(mp.values[v].regular[1] ==
              doctest::Approx(mesh->vertices[v][1] - 0.5).epsilon(1e-8));
    }

    // j = 0, m = 1 coincides with the model-target solve
    const auto boundary = line_fixture_boundary(*mesh);
    Schedule sched;
    sched.tol = 1e-9;
    const auto [m1, r1] = solve_product(mesh, boundary, 0, 1, {}, sched);
    const auto [m2, r2] = solve_dirichlet(mesh, boundary, Target::model(), sched);
    double sup = 0.0;
    for (std::size_t v = 0; v < n; ++v)
        sup = std::max(sup, value_distance(m1.values[v], m2.values[v]));
    CHECK(sup < 1e-9);

    // weak coupling: kappa large keeps the solution near the uncoupled one
    std::vector<MapValue> bc(n);
    for (std::size_t v = 0; v < n; ++v) {
        bc[v].regular = {0.0, 0.0};
        bc[v].singular = {GluedPoint::on_sheet(0, 0.5, 0.0)};
        if (mesh->boundary[v]) {
            const double th =
                std::atan2(mesh->vertices[v][1], mesh->vertices[v][0]);
            bc[v].regular = {std::cos(th), std::sin(th)};
            bc[v].singular = {
                GluedPoint::on_sheet(0, 0.5 + 0.2 * std::cos(th), 0.0)};
        }
    }
    const auto [u0, q0] = solve_product(mesh, bc, 1, 1, {}, sched);
    double max_rho = 0.0;
    for (const auto& val : u0.values)
        max_rho = std::max(max_rho, val.factor().point().rho());
    double prev = 1e300;
    for (double kappa : {2.0, 4.0, 8.0}) {
        const auto [uk, qk] = solve_product(mesh, bc, 1, 1, kappa, sched);
        double dev = 0.0;
        for (std::size_t v = 0; v < n; ++v)
            dev = std::max(dev, value_distance(uk.values[v], u0.values[v]));
        CHECK(dev <= 2.0 * std::pow(max_rho, kappa));
        CHECK(dev <= prev * (1.0 + 1e-9));
        prev = dev;
        for (std::size_t i = 1; i < qk.energy_history.size(); ++i)
            CHECK(qk.energy_history[i] <= qk.energy_history[i - 1] + 1e-12);
    }
}

TEST_CASE("winding boundary solve stays interior (smoke)") {
    const auto mesh = shared_disk(0.1);
    std::vector<MapValue> b(mesh->n_vertices(), MapValue::model(0.6, 0.0));
    for (std::size_t v = 0; v < mesh->n_vertices(); ++v)
        if (mesh->boundary[v]) {
            const double th =
                std::atan2(mesh->vertices[v][1], mesh->vertices[v][0]);
            b[v] = MapValue::model(0.6 + 0.4 * std::cos(th),
                                   10.0 * std::sin(th));
        }
    Schedule sched;
    sched.tol = 1e-8;
    sched.max_sweeps = 2000;
    const auto [map, rep] = solve_dirichlet(mesh, b, Target::model(), sched);
    CHECK(rep.converged);
    double min_rho = 1e300;
    for (std::size_t v = 0; v < mesh->n_vertices(); ++v) {
        const auto& g = map.values[v].factor();
        min_rho = std::min(min_rho, g.is_basepoint() ? 0.0 : g.point().rho());
    }
    CHECK(min_rho > 0.0);
}

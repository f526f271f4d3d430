#include <doctest.h>

#include "wpharm/analysis.hpp"
#include "wpharm/quadrature.hpp"

#include <cmath>
#include <memory>

using namespace wpharm;

namespace {

std::shared_ptr<const Mesh> shared_disk(double h) {
    return std::make_shared<const Mesh>(build_disk_mesh(h));
}

DiscreteMap line_map_on(std::shared_ptr<const Mesh> mesh) {
    return discretize(mesh, fixture_line_map(2.0, 1.0));
}

} // namespace

TEST_CASE("energy profile of the linear geodesic-line map") {
    // closed forms: E(r) = pi r^2, I(r) = pi r^3, ratio = 1
    const auto mesh = shared_disk(0.05);
    const DiscreteMap map = line_map_on(mesh);
    const std::vector<double> radii = {0.25, 0.375, 0.5, 0.625, 0.75};
    const EnergyProfile prof = energy_profile(map, {0.0, 0.0}, radii);
    REQUIRE(!prof.degenerate);
    for (std::size_t i = 0; i < radii.size(); ++i) {
        const double r = radii[i];
        CHECK(prof.E[i] == doctest::Approx(M_PI * r * r).epsilon(0.01));
        CHECK(prof.I[i] == doctest::Approx(M_PI * r * r * r).epsilon(0.002));
        CHECK(prof.ratio_corr[i] == doctest::Approx(1.0).epsilon(0.012));
    }
    const OrderResult ord = order_at(prof);
    REQUIRE(ord.ok);
    CHECK(ord.alpha == doctest::Approx(1.0).epsilon(0.01));

    // degenerate profile of a constant map
    DiscreteMap cmap = map;
    for (auto& v : cmap.values) v = MapValue::model(1.0, 0.0);
    const EnergyProfile dprof = energy_profile(cmap, {0.0, 0.0}, radii);
    CHECK(dprof.degenerate);
}

TEST_CASE("order of the quadratic fixture") {
    // f = x^2 - y^2 into the horizontal geodesic: E(r) = 2 pi r^4,
    // I(r) = pi r^5, order 2
    const auto mesh = shared_disk(0.02);
    const AnalyticMap quad([](double x, double y) {
        return GluedPoint::on_sheet(0, 3.0 + (x * x - y * y), 0.0);
    });
    const DiscreteMap map = discretize(mesh, quad);
    const std::vector<double> radii = {0.3, 0.4, 0.5, 0.6};
    const EnergyProfile prof = energy_profile(map, {0.0, 0.0}, radii);
    for (std::size_t i = 0; i < radii.size(); ++i) {
        const double r = radii[i];
        CHECK(prof.E[i] ==
              doctest::Approx(2.0 * M_PI * std::pow(r, 4)).epsilon(0.02));
        CHECK(prof.I[i] ==
              doctest::Approx(M_PI * std::pow(r, 5)).epsilon(0.01));
    }
    const OrderResult ord = order_at(prof);
    REQUIRE(ord.ok);
    CHECK(ord.alpha == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("order is stable under a conformal domain perturbation") {
    MetricSpec spec;
    spec.psi = [](double x, double y) { return 0.05 * (x * x - 0.5 * y * y); };
    spec.c2_bound = 0.35;
    const auto mesh = std::make_shared<const Mesh>(build_disk_mesh(0.02, spec));
    const DiscreteMap map = line_map_on(mesh);
    const std::vector<double> radii = {0.12, 0.2, 0.3, 0.4};
    const EnergyProfile prof = energy_profile(map, {0.0, 0.0}, radii);
    CHECK(prof.c == doctest::Approx(0.35));
    const OrderResult ord = order_at(prof);
    REQUIRE(ord.ok);
    CHECK(ord.alpha == doctest::Approx(1.0).epsilon(0.02));
    // corrected ratios non-decreasing within the stated slack
    double prev = -1e300;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        CHECK(prof.ratio_corr[i] >= prev * (1.0 - 1e-3));
        prev = prof.ratio_corr[i];
    }
}

TEST_CASE("epsilon energy") {
    const auto mesh = shared_disk(0.02);
    const DiscreteMap map = line_map_on(mesh);
    const EpsilonEnergy e = epsilon_energy(map, {0.1, -0.2}, 0.1);
    CHECK(e.raw == doctest::Approx(M_PI).epsilon(1e-3));
    CHECK(e.normalized == doctest::Approx(1.0).epsilon(1e-3));

    DiscreteMap cmap = map;
    for (auto& v : cmap.values) v = MapValue::model(1.0, 0.0);
    CHECK(epsilon_energy(cmap, {0.1, -0.2}, 0.1).raw ==
          doctest::Approx(0.0));

    // cross-validation: integrated normalized epsilon-energy over B_{1/2}
    // against the clipped edge energy
    double integrated = 0.0;
    for (std::size_t v = 0; v < mesh->n_vertices(); ++v) {
        const double r = std::hypot(mesh->vertices[v][0], mesh->vertices[v][1]);
        if (r > 0.5) continue;
        const EpsilonEnergy ev = epsilon_energy(
            map, {mesh->vertices[v][0], mesh->vertices[v][1]}, 0.08, 90);
        integrated += ev.normalized * mesh->vertex_area[v];
    }
    const EnergyProfile prof = energy_profile(map, {0.0, 0.0}, {0.5});
    CHECK(integrated == doctest::Approx(prof.E[0]).epsilon(0.05));
}

TEST_CASE("blow-up sequence of the line fixture") {
    // I(sigma) = pi sigma^3 (about u(0) = (2,0)), so lambda = 1/(sigma sqrt(pi))
    const auto mesh = shared_disk(0.1);
    const AnalyticMap u = fixture_line_map(2.0, 1.0);
    const std::vector<double> sigmas = {0.4, 0.2, 0.1, 0.05};
    const BlowupSequence seq = blowup_sequence(u, mesh, sigmas);
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        CHECK(seq.lambdas[i] ==
              doctest::Approx(1.0 / (sigmas[i] * std::sqrt(M_PI)))
                  .epsilon(1e-6));
        CHECK(seq.I1[i] == doctest::Approx(1.0).epsilon(1e-3));
    }
    // lambda recursion: lambda_half(sigma) * lambda(sigma) = lambda(sigma/2)
    for (std::size_t i = 0; i + 1 < sigmas.size(); ++i) {
        const double lhs = seq.lambda_half[i] * seq.lambdas[i];
        CHECK(std::fabs(lhs - seq.lambdas[i + 1]) <=
              1e-6 * seq.lambdas[i + 1]);
    }
}

TEST_CASE("homogeneous fixture is a blow-up fixed point") {
    const auto mesh = shared_disk(0.1);
    const AnalyticMap u = fixture_two_sheet_homogeneous();
    const std::vector<double> sigmas = {0.4, 0.2, 0.1, 0.05};
    BlowupSequence seq = blowup_sequence(u, mesh, sigmas);
    for (double i1 : seq.I1) CHECK(i1 == doctest::Approx(1.0).epsilon(1e-3));

    const PullbackMatrices mats = pullback_matrix(seq, 60, true);
    CHECK(mats.max_cauchy_defect <= 1e-6);

    // normalization is an isometry: matrices unchanged to 1e-10
    const DiscreteMap limit = discretize(
        mesh, fixture_glued_tangent(1.0, {1.0, 0.0}, 1.0 / std::sqrt(M_PI)));
    const TangentStructure st = tangent_structure(limit, 0.12, 1e-8);
    const BlowupSequence norm = normalize_blowup(seq, st);
    const PullbackMatrices mats2 = pullback_matrix(norm, 60, true);
    REQUIRE(mats.per_sigma.size() == mats2.per_sigma.size());
    double worst = 0.0;
    for (std::size_t s = 0; s < mats.per_sigma.size(); ++s)
        for (std::size_t a = 0; a < mats.per_sigma[s].size(); ++a)
            for (std::size_t b = 0; b < mats.per_sigma[s].size(); ++b)
                worst = std::max(worst,
                                 std::fabs(mats.per_sigma[s][a][b] -
                                           mats2.per_sigma[s][a][b]));
    CHECK(worst <= 1e-10);

    // phi-translation equivariance: shifting all phis by +5 recovers c = 5
    const AnalyticMap shifted([&u](double x, double y) {
        const GluedPoint g = u.at(x, y);
        if (g.is_basepoint()) return g;
        return GluedPoint::on_sheet(g.sheet(), g.point().rho(),
                                    g.point().phi() + 5.0);
    });
    BlowupSequence sseq = blowup_sequence(shifted, mesh, {0.4});
    // the rescaled shift is lambda^{-2} * ... : recover via normalization
    const BlowupSequence snorm = normalize_blowup(sseq, st);
    // after normalization the representative phis are symmetric
    CHECK(std::fabs(snorm.shifts[0]) > 0.0);
}

TEST_CASE("tangent structure of synthetic limits") {
    const auto mesh = shared_disk(0.05);

    // two sheets split by sign(x . e): k = 2, |A| = 2
    const DiscreteMap two = discretize(mesh, fixture_glued_tangent(1.0));
    const TangentStructure st2 = tangent_structure(two, 0.12, 1e-8);
    CHECK(st2.k == 2);
    CHECK(st2.n_classes == 2);
    CHECK(st2.alpha == doctest::Approx(1.0).epsilon(0.02));

    // folded line: k = 2 components in a single class
    const DiscreteMap fold = discretize(mesh, fixture_folded_line());
    const TangentStructure st1 = tangent_structure(fold, 0.12, 1e-8);
    CHECK(st1.k == 2);
    CHECK(st1.n_classes == 1);

    // piecewise-function property and cross-class additivity
    const PiecewiseReport rep = piecewise_function_check(two, st2, 1e-8);
    CHECK(rep.max_within_defect <= 1e-8);
    CHECK(rep.max_collinear_defect <= 1e-8);
    CHECK(rep.max_cross_defect <= 1e-8);
    CHECK(rep.offending_pairs == 0);

    // first-eigenvalue relation on the half-circle components:
    // lambda_1 = (pi/arc)^2 = alpha(alpha + n - 2) = 1
    const auto arcs = component_arcs(two, st2);
    REQUIRE(arcs.size() == 2);
    for (double arc : arcs) {
        CHECK(arc == doctest::Approx(M_PI).epsilon(0.05));
        const double lam1 = std::pow(M_PI / arc, 2);
        CHECK(lam1 == doctest::Approx(st2.alpha * (st2.alpha + 0.0)).epsilon(0.1));
    }

    // three sectors: k = 3, three classes
    const DiscreteMap three =
        discretize(mesh, fixture_glued_three_sector(1.0));
    const TangentStructure st3 = tangent_structure(three, 0.12, 1e-8);
    CHECK(st3.k == 3);
    CHECK(st3.n_classes == 3);
}

TEST_CASE("comb approximation trends") {
    const auto mesh = shared_disk(0.05);
    const std::vector<double> sigmas = {0.2, 0.1, 0.05, 0.025, 0.0125};

    // decreasing suprema on the harmonic two-sheet family
    {
        const AnalyticMap base = fixture_two_sheet_widening(1.0, 0.35, 0.5);
        const DiscreteMap limit = discretize(
            mesh,
            fixture_glued_tangent(1.0, {1.0, 0.0}, 1.0 / std::sqrt(M_PI)));
        const TangentStructure st = tangent_structure(limit, 0.12, 1e-8);
        REQUIRE(st.n_classes == 2);
        Schedule sched;
        sched.tol = 1e-8;
        sched.max_sweeps = 500;
        const BlowupSequence seq = normalize_blowup(
            harmonic_blowup_sequence(base, mesh, sigmas, sched), st);
        const auto combs = comb_construction(seq, st);
        REQUIRE(combs.size() == sigmas.size());
        for (const auto& c : combs) REQUIRE(c.defined);
        for (std::size_t i = 1; i < combs.size(); ++i) {
            CHECK(combs[i].sup_pair_defect < combs[i - 1].sup_pair_defect);
            CHECK(combs[i].sup_point_defect < combs[i - 1].sup_point_defect);
            CHECK(combs[i].sup_comb_defect < combs[i - 1].sup_comb_defect);
        }
    }

    // rho_sigma and tooth anchors decreasing on the widening 3-sector family
    {
        const AnalyticMap base = fixture_three_sector();
        const DiscreteMap limit = discretize(
            mesh, fixture_glued_three_sector(1.0 / std::sqrt(M_PI)));
        const TangentStructure st = tangent_structure(limit, 0.12, 1e-8);
        REQUIRE(st.k == 3);
        const BlowupSequence seq =
            normalize_blowup(blowup_sequence(base, mesh, sigmas), st);
        const auto combs = comb_construction(seq, st);
        for (const auto& c : combs) REQUIRE(c.defined);
        for (std::size_t i = 1; i < combs.size(); ++i) {
            CHECK(combs[i].rho_sigma < combs[i - 1].rho_sigma);
            REQUIRE(!combs[i].tooth_rho.empty());
            CHECK(combs[i].tooth_rho[0] < combs[i - 1].tooth_rho[0] + 1e-12);
        }
    }

    // single-class input: comb undefined, reported
    {
        const AnalyticMap base = fixture_folded_line();
        const DiscreteMap limit = discretize(mesh, fixture_folded_line());
        const TangentStructure st = tangent_structure(limit, 0.12, 1e-8);
        const BlowupSequence seq =
            normalize_blowup(blowup_sequence(base, mesh, {0.2, 0.1}), st);
        const auto combs = comb_construction(seq, st);
        for (const auto& c : combs) CHECK(!c.defined);
    }
}

TEST_CASE("beta order on the singular-factor fixtures") {
    const auto mesh = shared_disk(0.02);
    const DiscreteMap map = line_map_on(mesh);
    const std::vector<double> radii = {0.12, 0.2, 0.3, 0.4};
    const EnergyProfile prof = energy_profile(map, {0.0, 0.0}, radii);
    const BetaResult beta = beta_order(prof, 0.0);
    REQUIRE(beta.ok);
    CHECK(beta.beta == doctest::Approx(1.0).epsilon(0.01));
    CHECK(beta.monotonicity_defect <= 1e-3);

    // 2^beta <= lambda^{v~}(1/2): on the exact fixture both sides are 2
    const AnalyticMap u = fixture_line_map(2.0, 1.0);
    const BlowupSequence seq = blowup_sequence(u, mesh, {0.4, 0.2});
    const double lam_half = seq.lambda_half[0];
    CHECK(std::pow(2.0, beta.beta) <= lam_half * (1.0 + 1e-3));
}

TEST_CASE("containment experiment smoke run") {
    ContainmentParams params;
    params.sigma0 = 0.2;
    params.k_max = 2;
    params.mesh_h = 0.08;
    params.r = 0.35;
    params.schedule.tol = 1e-7;
    params.schedule.max_sweeps = 300;
    const AnalyticMap base = fixture_two_sheet_widening();
    const AnalyticMap limit =
        fixture_glued_tangent(1.0, {1.0, 0.0}, 1.0 / std::sqrt(M_PI));
    const ContainmentReport rep =
        containment_experiment(base, limit, params);
    REQUIRE(rep.message.empty());
    REQUIRE(rep.steps.size() == 3);
    CHECK(rep.rho0 > 0.0);
    CHECK(rep.center_obstruction ==
          doctest::Approx(rep.rho0 / 2.0).epsilon(1e-6));
    CHECK(rep.c1 > 0.0);
    CHECK(rep.c2 >= 1.0);
    CHECK(rep.eps_admissible > 0.0);
    for (const auto& step : rep.steps) {
        CHECK(step.inclusion_ok);
        CHECK(step.sup_distance >= 0.0);
    }
}

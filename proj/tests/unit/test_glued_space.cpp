#include <doctest.h>

#include "wpharm/glued_space.hpp"

#include <cmath>
#include <random>

using namespace wpharm;

namespace {

std::mt19937_64 rng(77123ull);

GluedPoint random_glued(int sheets) {
    std::uniform_real_distribution<double> ur(0.2, 2.5);
    std::uniform_real_distribution<double> up(-1.5, 1.5);
    std::uniform_int_distribution<int> us(0, sheets - 1);
    return GluedPoint::on_sheet(us(rng), ur(rng), up(rng));
}

} // namespace

TEST_CASE("glued distance cases") {
    const GluedPoint a = GluedPoint::on_sheet(0, 1.0, 0.0);
    const GluedPoint b = GluedPoint::on_sheet(1, 2.0, 5.0);
    CHECK(distance_A(a, b) == doctest::Approx(3.0));
    CHECK(distance_A(a, a) == doctest::Approx(0.0));
    const GluedPoint c = GluedPoint::on_sheet(0, 3.0, 0.0);
    CHECK(distance_A(a, c) == doctest::Approx(2.0));
    CHECK(distance_A(GluedPoint::basepoint(), b) == doctest::Approx(2.0));
    // sheeted point built from P0 collapses to the shared basepoint
    CHECK(GluedPoint::on_sheet(3, ModelPoint::basepoint()).is_basepoint());
}

TEST_CASE("glued distance: triangle inequality and symmetry across sheets") {
    for (int i = 0; i < 400; ++i) {
        const GluedPoint a = random_glued(3);
        const GluedPoint b = random_glued(3);
        const GluedPoint c = random_glued(3);
        CHECK(distance_A(a, b) == doctest::Approx(distance_A(b, a)).epsilon(1e-12));
        CHECK(distance_A(a, b) <= distance_A(a, c) + distance_A(c, b) + 1e-9);
    }
}

TEST_CASE("cross-sheet additivity through the basepoint is exact") {
    for (int i = 0; i < 100; ++i) {
        const GluedPoint a = random_glued(1);
        GluedPoint b = random_glued(1);
        b = GluedPoint::on_sheet(1, b.point()); // force a different sheet
        const double lhs = distance_A(a, b);
        const double rhs = distance_A(a, GluedPoint::basepoint()) +
                           distance_A(GluedPoint::basepoint(), b);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-15));
    }
}

TEST_CASE("glued geodesics") {
    const GluedPoint x = GluedPoint::on_sheet(0, 1.0, 2.0);
    const GluedPoint y = GluedPoint::on_sheet(1, 2.0, -7.0);
    const auto g = glued_geodesic(x, y);
    CHECK(g.crosses_basepoint);
    REQUIRE(g.legs.size() == 2);
    CHECK(g.legs[0].length() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(g.legs[1].length() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(g.length == doctest::Approx(3.0));

    const auto same = glued_geodesic(GluedPoint::on_sheet(0, 1.0, 0.0),
                                     GluedPoint::on_sheet(0, 2.0, 0.0));
    CHECK(!same.crosses_basepoint);
    REQUIRE(same.legs.size() == 1);
    CHECK(same.length == doctest::Approx(1.0));

    // interpolation along the cross-sheet path: parameter 1/3 of the
    // (1,*),(2,*) pair lands exactly on P0
    const GluedPoint mid = glued_geodesic_point(x, y, 1.0 / 3.0);
    CHECK(mid.is_basepoint());
    const GluedPoint before = glued_geodesic_point(x, y, 0.2);
    CHECK(before.sheet() == 0);
    CHECK(before.point().rho() == doctest::Approx(1.0 - 0.6).epsilon(1e-12));
    const GluedPoint after = glued_geodesic_point(x, y, 0.5);
    CHECK(after.sheet() == 1);
    CHECK(after.point().rho() == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("npc quadrilateral inequality") {
    // all points equal: equality 0 <= 0
    const GluedPoint p = GluedPoint::on_sheet(0, 1.0, 0.5);
    QuadrupleReport rep = npc_quadrilateral_check({{p, p, p, 0.37}});
    CHECK(rep.max_violation <= 0.0 + 1e-15);

    // collinear same-sheet horizontal points: flat 1-D identity
    std::vector<Quadruple> flat;
    for (double l : {0.0, 0.25, 0.5, 0.9}) {
        flat.push_back({GluedPoint::on_sheet(0, 3.0, 0.2),
                        GluedPoint::on_sheet(0, 1.0, 0.2),
                        GluedPoint::on_sheet(0, 2.0, 0.2), l});
    }
    rep = npc_quadrilateral_check(flat);
    CHECK(std::fabs(rep.max_violation) < 1e-8);

    // random quadruples across 3 sheets
    std::uniform_real_distribution<double> ul(0.0, 1.0);
    std::vector<Quadruple> sample;
    for (int i = 0; i < 1000; ++i)
        sample.push_back(
            {random_glued(3), random_glued(3), random_glued(3), ul(rng)});
    rep = npc_quadrilateral_check(sample, 1e-6);
    CHECK(rep.max_violation <= 1e-6);
    CHECK(rep.violations_beyond_tol == 0);
}

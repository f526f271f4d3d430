#include <doctest.h>

#include "support/oracles.hpp"
#include "wpharm/quadrature.hpp"

#include <cmath>

using namespace wpharm;

TEST_CASE("adaptive simpson on smooth integrands") {
    CHECK(adaptive_simpson([](double x) { return std::sin(x); }, 0.0,
                           M_PI, 1e-12) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(adaptive_simpson([](double x) { return x * x; }, 0.0, 1.0, 1e-12) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("cstar agrees with the beta-function value") {
    // Cstar = (1/6) B(5/6, 1/2), an independent closed form
    CHECK(std::fabs(cstar() - oracles::cstar_beta()) < 1e-12);
    CHECK(cstar() == doctest::Approx(0.37342).epsilon(2e-5));
}

TEST_CASE("kernel tables match direct quadrature") {
    auto psi1_direct = [](double t) {
        return adaptive_simpson(
            [](double x) { return std::pow(std::sin(x), 2.0 / 3.0); }, t,
            M_PI / 2.0, 1e-14);
    };
    auto psi2_direct = [](double t) {
        return adaptive_simpson(
            [](double x) { return std::pow(std::sin(x), -4.0 / 3.0); }, t,
            M_PI / 2.0, 1e-14);
    };
    for (double t : {1e-6, 1e-4, 0.01, 0.1, 0.5, 1.0, 1.4, 1.56}) {
        CHECK(psi1(t) == doctest::Approx(psi1_direct(t)).epsilon(1e-10));
        CHECK(psi2(t) == doctest::Approx(psi2_direct(t)).epsilon(1e-9));
    }
    CHECK(psi1(M_PI / 2.0) == doctest::Approx(0.0));
    CHECK(psi1(0.0) * (1.0 / 3.0) == doctest::Approx(cstar()).epsilon(1e-12));
}

#include "wpharm/quadrature.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace wpharm {

namespace {

double simpson_rec(const std::function<double(double)>& f, double a, double b,
                   double fa, double fm, double fb, double whole, double tol,
                   int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

constexpr double kHalfPi = 1.57079632679489661923;

// Shared layout for the two cached kernel tables: values of the integral
// from theta to pi/2, tabulated on the cubically graded grid theta = pi/2
// tau^3 so the fractional-power behavior of both integrands at theta = 0
// becomes smooth in tau. Cubic Hermite interpolation with the exact
// derivative keeps the table error near rounding level.
struct KernelTable {
    int n;
    double dtau;
    std::vector<double> val; // integral from theta(tau_i) to pi/2
    std::vector<double> der; // d val / d tau = -g(theta(tau)) * theta'(tau)

    KernelTable(int n_, const std::function<double(double)>& g) : n(n_) {
        dtau = 1.0 / n;
        val.assign(n + 1, 0.0);
        der.assign(n + 1, 0.0);
        auto gt = [&](double tau) {
            if (tau <= 0.0) return 0.0;
            return g(kHalfPi * tau * tau * tau) * kHalfPi * 3.0 * tau * tau;
        };
        for (int i = 0; i <= n; ++i) der[i] = -gt(i * dtau);
        // accumulate from the right end so val[n] = 0
        for (int i = n - 1; i >= 0; --i)
            val[i] = val[i + 1] +
                     adaptive_simpson(gt, i * dtau, (i + 1) * dtau, 1e-16, 24);
    }

    double eval(double t) const {
        if (t <= 0.0) return val[0];
        if (t >= kHalfPi) return 0.0;
        const double tau = std::cbrt(t / kHalfPi);
        const double x = tau / dtau;
        int i = static_cast<int>(x);
        if (i >= n) i = n - 1;
        const double u = x - i;
        const double h = dtau;
        const double y0 = val[i], y1 = val[i + 1];
        const double d0 = der[i], d1 = der[i + 1];
        const double u2 = u * u, u3 = u2 * u;
        return (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * h * d0 +
               (-2 * u3 + 3 * u2) * y1 + (u3 - u2) * h * d1;
    }
};

double sin_p23(double t) { return std::pow(std::sin(t), 2.0 / 3.0); }

// regular part of sin^{-4/3}: bounded on [0, pi/2], ~ (2/9) t^{2/3} near 0
double psi2_regular(double t) {
    if (t <= 0.0) return 0.0;
    if (t < 1e-4) {
        // series: (theta/sin theta)^{4/3} - 1 = (2/9)t^2 + O(t^4), all over t^{4/3}
        return (2.0 / 9.0) * std::pow(t, 2.0 / 3.0);
    }
    return std::pow(std::sin(t), -4.0 / 3.0) - std::pow(t, -4.0 / 3.0);
}

} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol, int max_depth) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

double cstar() {
    // u^6 = sin^2 theta turns the integrand into (1/3) sin^{2/3} theta
    static const double value =
        adaptive_simpson(sin_p23, 0.0, kHalfPi, 1e-15, 30) / 3.0;
    return value;
}

double psi1(double t) {
    static const KernelTable table(4096, sin_p23);
    return table.eval(t);
}

double psi2(double t) {
    if (t <= 0.0)
        throw std::domain_error("psi2: argument must be positive");
    static const KernelTable table(4096, psi2_regular);
    const double reg = table.eval(t);
    const double sing =
        3.0 * (std::pow(t, -1.0 / 3.0) - std::pow(kHalfPi, -1.0 / 3.0));
    return reg + sing;
}

} // namespace wpharm

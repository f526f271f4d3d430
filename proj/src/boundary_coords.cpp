#include "wpharm/boundary_coords.hpp"

#include <cmath>
#include <stdexcept>

namespace wpharm {

ModelPoint plumbing_to_model(const PlumbingParam& t, int branch_offset) {
    const double mod = std::abs(t.t);
    if (mod >= 1.0)
        throw std::domain_error("plumbing_to_model: |t| must be < 1");
    if (mod == 0.0) return ModelPoint::basepoint();
    const double rho = 2.0 / std::sqrt(-std::log(mod));
    const double arg = std::arg(t.t) + 2.0 * M_PI * branch_offset;
    return ModelPoint::interior(rho, arg / 8.0);
}

PlumbingResult model_to_plumbing(const ModelPoint& p) {
    PlumbingResult out;
    if (p.is_basepoint()) {
        out.t.t = 0.0;
        return out;
    }
    const double rho = p.rho();
    const double mod = std::exp(-4.0 / (rho * rho));
    double arg = 8.0 * p.phi();
    if (arg > M_PI || arg <= -M_PI) {
        out.multivalued = true;
        arg = std::remainder(arg, 2.0 * M_PI);
    }
    out.t.t = std::polar(mod, arg);
    return out;
}

double product_distance(const ProductPoint& p, const ProductPoint& q) {
    if (p.regular.size() != q.regular.size() ||
        p.singular.size() != q.singular.size())
        throw std::domain_error("product_distance: shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < p.regular.size(); ++i) {
        const double d = p.regular[i] - q.regular[i];
        acc += d * d;
    }
    for (std::size_t i = 0; i < p.singular.size(); ++i) {
        const double d = distance(p.singular[i], q.singular[i]);
        acc += d * d;
    }
    return std::sqrt(acc);
}

} // namespace wpharm

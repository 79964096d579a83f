#include "spider/boundary.hpp"

#include <cmath>
#include <stdexcept>

namespace spider {

BoundaryFn::BoundaryFn(Params params, RootConfig root) : params_(params), root_(root) {}

double BoundaryFn::phi(double s) const {
    const int n = params_.n;
    if (n < 2) throw std::domain_error("phi: requires n >= 2");
    if (s < 0.0) throw std::domain_error("phi: requires s >= 0");
    const double m = n - 1.0;
    return m * s - 0.5 * m * m + 0.5 * n * (n - 2.0) * std::exp(-2.0 * s / m);
}

double BoundaryFn::phi_prime(double s) const {
    const int n = params_.n;
    if (n < 2) throw std::domain_error("phi_prime: requires n >= 2");
    if (s < 0.0) throw std::domain_error("phi_prime: requires s >= 0");
    const double m = n - 1.0;
    return m - n * (n - 2.0) / m * std::exp(-2.0 * s / m);
}

double BoundaryFn::f_lower(double z) const {
    if (z > 0.0) throw std::domain_error("f_lower: requires z <= 0");
    if (z <= -0.5) return z + 0.5;
    if (params_.n == 2) return z + 0.5; // phi is affine: s - 1/2
    // Invert phi by bracketed root-finding; phi(0) = -1/2 <= z and phi is
    // strictly increasing, so doubling the upper end always brackets.
    double hi = 1.0;
    while (phi(hi) < z) hi *= 2.0;
    return find_root([&](double s) { return phi(s) - z; }, 0.0, hi, root_,
                     [&](double s) { return phi_prime(s); });
}

double BoundaryFn::g_upper(double y) {
    if (y < 0.5) throw std::domain_error("g_upper: requires y >= 1/2");
    return y - 0.5;
}

bool BoundaryFn::stage1_satisfied(double y, double z) const {
    if (y < 0.5) return false;
    return z <= phi(y - 0.5);
}

} // namespace spider

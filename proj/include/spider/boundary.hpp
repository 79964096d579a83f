#pragma once

#include "spider/domain.hpp"
#include "spider/numerics.hpp"

namespace spider {

/// Free-boundary functions of the stopping band: the explicit phi, its
/// numerical inverse f on (-1/2, 0], the affine branch of f, and the upper
/// boundary g. Stateless apart from configuration; thread-safe.
class BoundaryFn {
public:
    explicit BoundaryFn(Params params, RootConfig root = {});

    const Params& params() const { return params_; }

    /// phi(s) = (n-1)s - (n-1)^2/2 + n(n-2)/2 * exp(-2s/(n-1)) for s >= 0.
    /// phi(0) = -1/2 exactly; strictly increasing for n >= 2.
    double phi(double s) const;

    /// phi'(s) = (n-1) - n(n-2)/(n-1) * exp(-2s/(n-1)); phi'(0) = 1/(n-1).
    double phi_prime(double s) const;

    /// Lower stopping boundary in x as a function of z <= 0:
    /// f(z) = z + 1/2 on z <= -1/2, and f = phi^{-1} on (-1/2, 0].
    /// Continuous, nondecreasing, f(-1/2) = 0.
    double f_lower(double z) const;

    /// Upper stopping boundary g(y) = y - 1/2, for y >= 1/2.
    static double g_upper(double y);

    /// First-stage condition of the two-stage rule: the band is nonempty,
    /// i.e. f(z) <= g(y). Equivalent to y >= 1/2 and z <= phi(y - 1/2).
    bool stage1_satisfied(double y, double z) const;

private:
    Params params_;
    RootConfig root_;
};

} // namespace spider

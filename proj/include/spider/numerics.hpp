#pragma once

#include <functional>
#include <stdexcept>

namespace spider {

/// Thrown when an adaptive scheme exhausts its budget before reaching the
/// requested tolerance.
class ToleranceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct QuadratureConfig {
    double abs_tol = 1e-10;
    double rel_tol = 1e-12;
    int max_subdivisions = 2000;
};

struct RootConfig {
    double abs_tol = 1e-12;
    int max_iterations = 200;
};

struct IntegralResult {
    double value = 0.0;
    double error_estimate = 0.0;
};

/// Adaptive Gauss-Kronrod 7/15 quadrature of fn over [a, b].
/// Guarantee for smooth integrands: |value - true| <= max(abs_tol, rel_tol*|value|).
/// Throws ToleranceError if max_subdivisions is exhausted first.
IntegralResult integrate(const std::function<double(double)>& fn, double a, double b,
                         const QuadratureConfig& cfg = {});

/// Bracketed root of fn on [lo, hi] (fn(lo)*fn(hi) <= 0 required).
/// Bisection narrows the bracket, then a Newton (if derivative given) or
/// secant polish runs inside it. Result is within abs_tol of the root.
double find_root(const std::function<double(double)>& fn, double lo, double hi,
                 const RootConfig& cfg = {},
                 const std::function<double(double)>& derivative = {});

} // namespace spider

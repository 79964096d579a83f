#pragma once

#include "spider/boundary.hpp"
#include "spider/domain.hpp"
#include "spider/numerics.hpp"

#include <utility>
#include <vector>

namespace spider {

/// Value of the one-sided running-maximum problem:
/// V(x, y) = y - x^2 if y - x >= 1/2, else y^2 + 1/4 - (2y - 1)x,
/// on the domain y >= max(x, 0).
double v_onesided(double x, double y);

/// Value function for n = 1 (reflected Brownian motion, two-sided maximum):
/// U(x, y) = V(|x|, y) for y >= 1/2 and the constant 1/2 below.
double u_n1(double x, double y);

/// Closed-form value function for n = 2: the three-variable formula when
/// y - z < 1, and the one-sided reduction V(x,y) - z / V(-x,-z) + y above.
double u_n2(double x, double y, double z);

/// Active region of the general evaluator. R1B1..R1B5 are the five branches
/// of the closed-form band region, R2 the integral region above the band
/// curve, R3 the small-y region, N1 the n = 1 closed form.
enum class Region { R1B1, R1B2, R1B3, R1B4, R1B5, R2, R3, N1 };

const char* region_name(Region r);

struct EvaluatorConfig {
    QuadratureConfig quadrature{};
    RootConfig root{};
    /// Chebyshev nodes for the cached U(1/2, 1/2, s) table on [-1/2, 0].
    int table_nodes = 2049;
};

/// Region-dispatching evaluator of the value function U for one fixed n,
/// with a cached table of U(1/2, 1/2, s). Construction builds the table
/// (n >= 2); afterwards the evaluator is immutable and safe to share across
/// threads.
class ValueEvaluator {
public:
    explicit ValueEvaluator(Params params, EvaluatorConfig cfg = {});

    const Params& params() const { return params_; }
    const BoundaryFn& boundary() const { return boundary_; }

    /// U at a state of the reduced space, for any n >= 1.
    double evaluate(const State& s) const;

    Region classify(const State& s) const;

    /// The general n >= 2 machinery (R1 closed form, R2 integral, R3 table).
    double u_general(const State& s) const;

    /// dU/dy on the region y >= 1/2, z > phi(y - 1/2).
    double u_y_partial(const State& s) const;

    /// U(1/2, 1/2, s) for s in [-1/2, 0], from the cached table.
    double u_half_half(double s) const;

    /// Same value recomputed through the R2 formula, bypassing the table.
    double u_half_half_direct(double s) const;

    /// U(0, 0, 0) = 2n(n-1) * int_{-1/2}^0 U(1/2,1/2,s) / (n-1-2s)^2 ds
    /// (0.5 for n = 1, from the closed form).
    double u000() const { return u000_; }

    /// Best constant C_n = 2 sqrt(U(0,0,0)); exact sqrt(2), sqrt(3) for n = 1, 2.
    double best_constant() const;

    /// Table nodes as (s, value) pairs, and the retained Chebyshev order.
    const std::vector<std::pair<double, double>>& table() const { return table_; }
    int interpolation_order() const { return static_cast<int>(coeffs_.size()) - 1; }

private:
    double region1(double x, double y, double z, Region* which = nullptr) const;
    double region2(double x, double y, double z) const;
    double region3(double x, double y, double z) const;
    /// (n-1)s - phi(s - 1/2) for s >= 1/2; strictly positive.
    double band_denominator(double s) const;
    double cheb_eval(double s) const;
    void build_table();

    Params params_;
    EvaluatorConfig cfg_;
    BoundaryFn boundary_;
    std::vector<std::pair<double, double>> table_;
    std::vector<double> coeffs_;
    double u000_ = 0.0;
};

} // namespace spider

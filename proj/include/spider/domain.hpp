#pragma once

namespace spider {

/// Slack used when checking state invariants, absorbing floating-point drift
/// accumulated by simulation.
inline constexpr double kStateSlack = 1e-12;

/// Number of rays of the spider, with the derived skew parameter 1 - 1/n.
struct Params {
    int n = 1;

    explicit Params(int rays);

    /// Probability that an excursion from the hub starts on a non-longest ray.
    double skew() const { return 1.0 - 1.0 / static_cast<double>(n); }
};

/// Reduced coordinates of the spider: x is the signed position (positive on
/// the longest rib), y the longest rib, z minus the second-longest rib.
/// For n = 1 the state collapses to (x, y) and z is identically 0.
struct State {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    State() = default;
    State(double x, double y, double z);
};

/// True iff (x, y, z) satisfies z <= 0 <= y, z <= x <= y, y + z >= 0
/// up to the given slack.
bool state_in_domain(double x, double y, double z, double slack = kStateSlack);

/// G(x, y, z) = y - z - x^2, the stopped payoff after Wald's identity folds
/// the elapsed-time penalty into x^2.
double gain(const State& s);

class BoundaryFn;

/// True iff immediate stopping is optimal: f(z) <= x <= y - 1/2 (the band is
/// closed, so boundary ties stop). For n = 1 the rule is y - |x| >= 1/2.
bool in_stopping_region(const Params& params, const State& s);
bool in_stopping_region(const BoundaryFn& boundary, const State& s);

} // namespace spider

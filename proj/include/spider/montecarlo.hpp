#pragma once

#include "spider/boundary.hpp"
#include "spider/domain.hpp"
#include "spider/rng.hpp"

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace spider {

/// Thrown when every simulated path hits the step cap.
class SimulationCapError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SimConfig {
    double step = 1.0 / 64;             ///< spatial step h; time advances by h^2 per step
    std::uint64_t num_paths = 100'000;
    std::uint64_t seed = 1;
    std::uint64_t max_steps = 100'000'000; ///< per-path safety cap
    int threads = 1;                    ///< <= 0 selects hardware concurrency
    bool antithetic = false;            ///< pair paths with complemented move words
};

/// h > 0, 1/2 an integer multiple of h, num_paths >= 1 (even when antithetic).
void validate(const SimConfig& cfg);

/// Symmetric +-h random walk in the radius with uniform ray reassignment at
/// the hub. Radius and ribs live on the integer grid (units of h); the
/// reduced coordinates are derived views. Zero-crossings are exact and the
/// jump of the signed coordinate from -Y to +Y falls out of the tie-break
/// (lowest ray index carries the longest rib).
class SpiderWalker {
public:
    SpiderWalker(const Params& params, double step)
        : n_(params.n), h_(step), ribs_(static_cast<std::size_t>(params.n), 0) {}

    /// Back to the origin: all ribs zero, radius zero, clock zero.
    void reset();

    /// Place the walker at a reduced state; coordinates must sit on the grid.
    /// x >= 0 puts the walker on the longest ray (index 1), x < 0 on ray 2.
    void reset_to(const State& s);

    /// Advance one step, consuming one uniform 64-bit word: the top bit moves
    /// the radius, and at the hub bits [16, 48) draw the next ray.
    void step(std::uint64_t word) {
        if (radius_ == 0) {
            ray_ = static_cast<int>(
                (static_cast<std::uint64_t>(static_cast<std::uint32_t>(word >> 16)) *
                 static_cast<std::uint64_t>(n_)) >>
                32);
            cur_rib_ = ribs_[static_cast<std::size_t>(ray_)];
            radius_ = 1;
        } else {
            radius_ += (word >> 63) ? 1 : -1;
        }
        if (radius_ > cur_rib_) {
            cur_rib_ = radius_;
            ribs_[static_cast<std::size_t>(ray_)] = radius_;
            if (ray_ == best_ray_) {
                best_ = radius_;
            } else if (radius_ > best_) {
                second_ = best_;
                best_ = radius_;
                best_ray_ = ray_;
            } else if (radius_ == best_) {
                second_ = best_;
                if (ray_ < best_ray_) best_ray_ = ray_;
            } else if (radius_ > second_) {
                second_ = radius_;
            }
        }
        ++steps_;
    }

    int ray() const { return ray_ + 1; } ///< 1-based ray index
    bool on_longest() const { return ray_ == best_ray_; }
    double h() const { return h_; }
    double radius() const { return static_cast<double>(radius_) * h_; }
    double elapsed() const { return static_cast<double>(steps_) * h_ * h_; }
    std::uint64_t steps() const { return steps_; }
    std::vector<double> ribs() const;

    std::int64_t radius_units() const { return radius_; }
    std::int64_t best_units() const { return best_; }
    std::int64_t second_units() const { return second_; }

    double x() const { return (on_longest() ? radius_ : -radius_) * h_; }
    double y() const { return static_cast<double>(best_) * h_; }
    double z() const { return n_ > 1 ? -static_cast<double>(second_) * h_ : 0.0; }
    double diameter() const {
        return n_ > 1 ? static_cast<double>(best_ + second_) * h_ : static_cast<double>(best_) * h_;
    }

    /// Reduced state (x, y, z); z is identically 0 for n = 1.
    State reduced() const { return State(x(), y(), z()); }

private:
    int n_;
    double h_;
    std::vector<std::int64_t> ribs_;
    int ray_ = 0;
    std::int64_t radius_ = 0;
    std::int64_t cur_rib_ = 0;
    std::int64_t best_ = 0;
    std::int64_t second_ = 0;
    int best_ray_ = 0;
    std::uint64_t steps_ = 0;
};

struct PathResult {
    double tau = 0.0;
    double d_tau = 0.0;  ///< sum of the two largest ribs (the single rib for n = 1)
    double payoff = 0.0; ///< d_tau - tau
    double x_tau = 0.0, y_tau = 0.0, z_tau = 0.0;
    bool capped = false;
};

struct OptimalRule {};
struct FixedTimeRule {
    double horizon = 0.0;
};
struct FirstHitDiameterRule {
    double diameter = 0.0;
};
struct PredicateRule {
    std::function<bool(const State&, double)> stop;
};
using StoppingRule = std::variant<OptimalRule, FixedTimeRule, FirstHitDiameterRule, PredicateRule>;

/// "optimal", "fixed-time:T", "first-hit-diameter:D".
StoppingRule parse_rule(const std::string& text);
std::string rule_name(const StoppingRule& rule);

/// Walk one path from the origin until the rule fires or max_steps is hit.
PathResult run_path(const Params& params, const SimConfig& cfg, const StoppingRule& rule,
                    std::uint64_t path_index = 0);

struct EstimateResult {
    double mean_payoff = 0.0, stderr_payoff = 0.0;
    double mean_tau = 0.0, stderr_tau = 0.0;
    double mean_d = 0.0, stderr_d = 0.0;
    double cov_d_tau = 0.0; ///< sample covariance of (D_tau, tau)
    std::uint64_t samples = 0; ///< statistical units (pairs when antithetic)
    std::uint64_t completed = 0;
    std::uint64_t capped = 0;
};

/// Sample mean and standard error of the payoff (and of tau, D) over completed
/// paths from the origin. Capped paths are counted and excluded; throws
/// SimulationCapError if nothing completes.
EstimateResult estimate_payoff(const Params& params, const SimConfig& cfg, const StoppingRule& rule);

/// Five-branch CDF of Z_sigma (sigma = first time Y >= 1/2) started from
/// (x, y, z) with y < 1/2; n >= 2.
double zsigma_cdf_analytic(const Params& params, double x, double y, double z, double s);
/// Left limit of the same CDF (it has atoms at -y and at z).
double zsigma_cdf_left(const Params& params, double x, double y, double z, double s);

struct ZsigmaReport {
    double ks_distance = 0.0;
    std::uint64_t num_samples = 0;
    std::uint64_t capped = 0;
    double atom_at_start_empirical = 0.0; ///< empirical P(Z_sigma = z_start)
    double atom_at_start_analytic = 0.0;
};

/// Simulate Z_sigma and return the Kolmogorov-Smirnov distance between the
/// empirical law and the analytic CDF, evaluated at all sample points and
/// branch seams.
ZsigmaReport verify_zsigma(const Params& params, const SimConfig& cfg, const State& start);

struct MomentDiff {
    std::string name;
    double scaled = 0.0;   ///< moment of the lambda-scaled process
    double direct = 0.0;   ///< moment of the process started at the scaled state
    double std_err = 0.0;  ///< combined standard error
    double standardized = 0.0;
};

struct ScalingReport {
    double max_standardized = 0.0;
    std::vector<MomentDiff> moments;
    std::uint64_t paths = 0;
};

/// Brownian-scaling check: first and second moments of (X, Y, Z) at a fixed
/// horizon, comparing lambda * (walk from `start`, horizon T/lambda^2, step h)
/// against (walk from lambda*start, horizon T, step lambda*h).
ScalingReport verify_scaling(const Params& params, const SimConfig& cfg, double lambda,
                             double horizon, const State& start = State());

/// Fraction of paths whose signed coordinate reaches -level before +level,
/// started at the hub with an established longest rib of that length.
/// Converges to the skew parameter (n-1)/n.
double skew_hit_fraction(const Params& params, const SimConfig& cfg, double level);

} // namespace spider

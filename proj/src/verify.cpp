#include "spider/verify.hpp"

#include <algorithm>
#include <cmath>

namespace spider::verify {

namespace {

std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> v(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
    return v;
}

/// Deterministic grid over the reduced state space covering all regions.
std::vector<State> state_grid(int ny, int nz, int nx, double y_max = 2.2) {
    std::vector<State> states;
    for (double y : linspace(0.0, y_max, ny)) {
        const double z_lo = -std::min(y, 1.6);
        for (double z : linspace(z_lo, 0.0, nz)) {
            for (double x : linspace(z, y, nx)) {
                x = std::min(y, std::max(z, x)); // clamp linspace round-off
                if (state_in_domain(x, y, z)) states.emplace_back(x, y, z);
            }
        }
    }
    return states;
}

} // namespace

void SuiteReport::note(std::string name, double measured, double threshold) {
    const bool ok = measured <= threshold;
    details.push_back({std::move(name), measured, threshold, ok});
    worst = std::max(worst, measured);
    pass = pass && ok;
}

SuiteReport majorization(const ValueEvaluator& ev) {
    SuiteReport rep;
    rep.suite = "majorization";
    double worst_gap = 0.0;     // most negative u - gain
    double worst_stop = 0.0;    // |u - gain| inside the stopping band
    for (const State& s : state_grid(28, 9, 9)) {
        const double diff = ev.u_general(s) - gain(s);
        worst_gap = std::min(worst_gap, diff);
        if (ev.classify(s) == Region::R1B4) worst_stop = std::max(worst_stop, std::abs(diff));
    }
    rep.note("min(u - gain) >= -slack", -worst_gap, kMajorizationSlack);
    rep.note("u == gain on the stopping band", worst_stop, 1e-12);
    return rep;
}

SuiteReport seams(const ValueEvaluator& ev) {
    SuiteReport rep;
    rep.suite = "seams";
    const auto& b = ev.boundary();
    const double eps = 1e-10;

    // R1/R2 seam z = phi(y - 1/2), reachable inside the domain while the
    // seam value stays in [-1/2, 0]
    const double y_top = b.f_lower(0.0) + 0.5;
    double worst = 0.0;
    for (double y : linspace(0.5 + 1e-3, y_top - 1e-3, 9)) {
        const double zs = b.phi(y - 0.5);
        for (double x : linspace(zs + eps, y, 7)) {
            const double lo = ev.u_general(State(x, y, zs - eps));
            const double hi = ev.u_general(State(x, y, zs + eps));
            worst = std::max(worst, std::abs(hi - lo));
        }
    }
    rep.note("R1/R2 seam", worst, kSeamTol);

    // R2/R3 seam at y = 1/2
    worst = 0.0;
    for (double z : linspace(-0.45, -0.05, 9)) {
        for (double x : linspace(z, 0.45, 7)) {
            const double lo = ev.u_general(State(x, 0.5 - eps, z));
            const double hi = ev.u_general(State(x, 0.5 + eps, z));
            worst = std::max(worst, std::abs(hi - lo));
        }
    }
    rep.note("R2/R3 seam", worst, kSeamTol);

    // Branch seams inside R1: x = f(z), x = 0, x = y - 1/2, plus the knee
    // z = -1/2 where the affine and inverted branches of f meet
    worst = 0.0;
    for (double z : {-0.45, -0.3, -0.15}) {
        const double f = b.f_lower(z);
        const double y = f + 0.8;
        for (double xs : {f, 0.0, y - 0.5}) {
            const double lo = ev.u_general(State(xs - eps, y, z));
            const double hi = ev.u_general(State(xs + eps, y, z));
            worst = std::max(worst, std::abs(hi - lo));
        }
    }
    for (double x : {-0.45, -0.2, 0.1}) {
        const double lo = ev.u_general(State(x, 1.4, -0.5 - eps));
        const double hi = ev.u_general(State(x, 1.4, -0.5 + eps));
        worst = std::max(worst, std::abs(hi - lo));
    }
    rep.note("R1 branch seams", worst, kSeamTol);
    return rep;
}

SuiteReport kink(const ValueEvaluator& ev) {
    SuiteReport rep;
    rep.suite = "kink";
    const auto& b = ev.boundary();
    const double n1 = ev.params().n - 1.0;

    // u is exactly affine in x on each side of 0 in the continuation region,
    // so macroscopic differences give the one-sided slopes without
    // amplifying quadrature noise.
    double worst = 0.0;
    auto check = [&](double y, double z, double dp, double dm) {
        const double u0 = ev.u_general(State(0.0, y, z));
        const double sp = (ev.u_general(State(dp, y, z)) - u0) / dp;
        const double sm = (u0 - ev.u_general(State(-dm, y, z))) / dm;
        if (std::abs(sm) < 0.05) return; // ratio ill-conditioned; skip
        worst = std::max(worst, std::abs(sp / sm - n1));
    };

    for (double z : {-0.4, -0.25, -0.1}) {
        const double f = b.f_lower(z);
        check(f + 0.6, z, 0.9 * f, 0.9 * -z);            // R1, branches 2/3
        check(0.5 + 0.02, z, 0.2, 0.9 * -z);             // R2
    }
    for (double z : {-0.3, -0.15}) {
        for (double y : {0.35, 0.45})
            if (y + z > 0.05) check(y, z, 0.5 * y, 0.5 * -z); // R3
    }
    rep.note("|U_x(0+)/U_x(0-) - (n-1)|", worst, kKinkTol);
    return rep;
}

SuiteReport neumann(const ValueEvaluator& ev) {
    SuiteReport rep;
    rep.suite = "neumann";
    const double d = 3e-4;

    // One-sided second-order differences; states keep 2d of margin to any
    // region seam so the stencil stays on one smooth piece.
    double worst_y = 0.0;
    for (double y : {0.3, 0.45, 0.7, 1.0, 1.5}) {
        for (double z : {-0.2, -0.45, -0.8}) {
            if (z < -y || !state_in_domain(y, y, z)) continue;
            if (y < 0.5 && y + 2 * d > 0.5) continue;
            const double u0 = ev.u_general(State(y, y, z));
            const double u1 = ev.u_general(State(y, y + d, z));
            const double u2 = ev.u_general(State(y, y + 2 * d, z));
            worst_y = std::max(worst_y, std::abs((-3 * u0 + 4 * u1 - u2) / (2 * d)));
        }
    }
    rep.note("U_y(y, y+, z)", worst_y, kNeumannTol);

    double worst_z = 0.0;
    for (double y : {0.4, 0.7, 1.2}) {
        for (double z : {-0.1, -0.3, -0.45, -0.8}) {
            if (z - 2 * d < -y || !state_in_domain(z, y, z)) continue;
            if (y >= 0.5) {
                const double seam = ev.boundary().phi(y - 0.5);
                if (std::abs(z - seam) < 3 * d) continue;
                if (z > seam && z - 2 * d <= seam) continue;
            }
            const double u0 = ev.u_general(State(z, y, z));
            const double u1 = ev.u_general(State(z, y, z - d));
            const double u2 = ev.u_general(State(z, y, z - 2 * d));
            worst_z = std::max(worst_z, std::abs((3 * u0 - 4 * u1 + u2) / (2 * d)));
        }
    }
    rep.note("U_z(z, y, z-)", worst_z, kNeumannTol);
    return rep;
}

SuiteReport symmetry(const ValueEvaluator& ev) {
    SuiteReport rep;
    rep.suite = "symmetry";
    double worst = 0.0;
    for (double y : linspace(0.1, 1.5, 15)) {
        const double a = ev.u_general(State(-y, y, -y));
        const double b = ev.u_general(State(y, y, -y));
        worst = std::max(worst, std::abs(a - b));
    }
    rep.note("U(-y,y,-y) vs U(y,y,-y)", worst, kSymmetryTol);
    return rep;
}

SuiteReport uy_consistency(const ValueEvaluator& ev) {
    SuiteReport rep;
    rep.suite = "uy";
    const auto& b = ev.boundary();
    const double d = 1e-5;
    double worst = 0.0;
    for (double z : {-0.05, -0.15, -0.3}) {
        const double y_hi = b.f_lower(z) + 0.5;
        for (double y : linspace(0.5 + 0.02, y_hi - 0.02, 5)) {
            for (double x : {-0.8 * -z, -0.2 * -z, 0.0, 0.3 * y, 0.9 * y}) {
                const State s(x, y, z);
                const double fd =
                    (ev.u_general(State(x, y + d, z)) - ev.u_general(State(x, y - d, z))) / (2 * d);
                worst = std::max(worst, std::abs(fd - ev.u_y_partial(s)));
            }
        }
    }
    rep.note("central FD of u vs U_y formula", worst, kUyTol);
    return rep;
}

SuiteReport boundary_ode(const ValueEvaluator& ev) {
    SuiteReport rep;
    rep.suite = "boundary-ode";
    const auto& b = ev.boundary();
    const double n1 = ev.params().n - 1.0;
    const double d = 1e-5;
    double worst = 0.0;
    for (double z : linspace(-0.5 + 2 * d + 1e-4, -1e-3, 41)) {
        const double fp = (b.f_lower(z + d) - b.f_lower(z - d)) / (2 * d);
        const double residual = 2.0 * fp * (b.f_lower(z) - z / n1) - 1.0;
        worst = std::max(worst, std::abs(residual));
    }
    rep.note("2f'(z)[f(z) - z/(n-1)] vs 1", worst, kOdeTol);
    return rep;
}

SuiteReport n2_reduction(const ValueEvaluator& ev, int grid_points) {
    SuiteReport rep;
    rep.suite = "n2-reduction";
    if (ev.params().n != 2) {
        rep.note("suite requires n = 2", 1.0, 0.0);
        return rep;
    }
    // choose grid factors so ny*nz*nx >= grid_points
    int ny = 25, nz = 10, nx = 40;
    while (ny * nz * nx < grid_points) ++ny;
    double worst = 0.0;
    std::size_t visited = 0;
    for (const State& s : state_grid(ny, nz, nx, 2.5)) {
        worst = std::max(worst, std::abs(ev.u_general(s) - u_n2(s.x, s.y, s.z)));
        ++visited;
    }
    rep.note("max |u_general - closed form| over " + std::to_string(visited) + " states", worst,
             kReductionTol);

    // the worked identity: U(1/2,1/2,s) = 5/8 - s/2 + s^2/2
    worst = 0.0;
    for (double s : linspace(-0.5, 0.0, 101))
        worst = std::max(worst, std::abs(ev.u_half_half(s) - (0.625 - 0.5 * s + 0.5 * s * s)));
    rep.note("U(1/2,1/2,s) vs 5/8 - s/2 + s^2/2", worst, kReductionTol);
    return rep;
}

SuiteReport zsigma(const Params& params, const SimConfig& cfg) {
    SuiteReport rep;
    rep.suite = "zsigma";
    const ZsigmaReport r = verify_zsigma(params, cfg, State(0.0, 0.0, 0.0));
    rep.note("KS distance, " + std::to_string(r.num_samples) + " samples", r.ks_distance,
             kKsThreshold);
    rep.note("atom at z_start: |empirical - analytic|",
             std::abs(r.atom_at_start_empirical - r.atom_at_start_analytic), kKsThreshold);
    return rep;
}

SuiteReport scaling(const Params& params, const SimConfig& cfg, double lambda, double horizon) {
    SuiteReport rep;
    rep.suite = "scaling";
    const ScalingReport r = verify_scaling(params, cfg, lambda, horizon);
    for (const auto& m : r.moments)
        rep.note(m.name + " standardized discrepancy", m.standardized, kScalingSigmas);
    return rep;
}

SuiteReport inequality(const ValueEvaluator& ev, const SimConfig& cfg) {
    SuiteReport rep;
    rep.suite = "inequality";
    const double cn = ev.best_constant();
    const double allowance = kDiscretizationC * cfg.step;

    std::vector<StoppingRule> battery = {
        FixedTimeRule{0.25}, FixedTimeRule{1.0},           FixedTimeRule{4.0},
        FirstHitDiameterRule{0.5}, FirstHitDiameterRule{1.0}, FirstHitDiameterRule{2.0},
        OptimalRule{}};

    for (const auto& rule : battery) {
        const EstimateResult est = estimate_payoff(ev.params(), cfg, rule);
        const double margin = est.mean_d - cn * std::sqrt(est.mean_tau);
        // delta-method error of mean_d - cn*sqrt(mean_tau), covariance included
        const double gp = est.mean_tau > 0.0 ? cn / (2.0 * std::sqrt(est.mean_tau)) : 0.0;
        const double cov_means = est.cov_d_tau / static_cast<double>(est.samples);
        const double var = std::max(0.0, est.stderr_d * est.stderr_d +
                                             gp * gp * est.stderr_tau * est.stderr_tau -
                                             2.0 * gp * cov_means);
        const double band = kInequalitySigmas * std::sqrt(var) + allowance;
        rep.note(rule_name(rule) + ": E[D] - C_n sqrt(E tau)", margin, band);
        if (std::holds_alternative<OptimalRule>(rule))
            rep.note("optimal: |E[D] - C_n sqrt(E tau)| (bound attained)", std::abs(margin), band);
    }
    return rep;
}

} // namespace spider::verify

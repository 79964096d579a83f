#include "spider/montecarlo.hpp"
#include "spider/value.hpp"

#include <doctest.h>

#include <cmath>

using namespace spider;

namespace {

SimConfig quick_cfg(double step, std::uint64_t paths, std::uint64_t seed = 1) {
    SimConfig cfg;
    cfg.step = step;
    cfg.num_paths = paths;
    cfg.seed = seed;
    return cfg;
}

std::uint64_t word_up(std::uint32_t ray_hi = 0) {
    return (1ull << 63) | (static_cast<std::uint64_t>(ray_hi) << 16);
}
std::uint64_t word_down() { return 0; }

/// hi32 value that Lemire-maps to the wanted ray index for n rays
std::uint32_t ray_bits(int ray, int n) {
    return static_cast<std::uint32_t>(((static_cast<std::uint64_t>(ray) << 32) + (1u << 16)) /
                                      static_cast<std::uint64_t>(n));
}

} // namespace

TEST_CASE("SimConfig validation") {
    CHECK_NOTHROW(validate(quick_cfg(1.0 / 64, 10)));
    CHECK_NOTHROW(validate(quick_cfg(0.01, 10))); // 0.5 / 0.01 = 50
    CHECK_THROWS_AS(validate(quick_cfg(0.013, 10)), std::invalid_argument);
    CHECK_THROWS_AS(validate(quick_cfg(-1.0, 10)), std::invalid_argument);
    SimConfig odd = quick_cfg(1.0 / 64, 11);
    odd.antithetic = true;
    CHECK_THROWS_AS(validate(odd), std::invalid_argument);
}

TEST_CASE("walker: hub reassignment and rib bookkeeping with scripted words") {
    const Params p(3);
    SpiderWalker w(p, 0.25);
    // from the origin: first step lands on the drawn ray at radius h
    w.step(word_up(ray_bits(1, 3)));
    CHECK(w.ray() == 2);
    CHECK(w.radius() == 0.25);
    CHECK(w.y() == 0.25);
    CHECK(w.z() == 0.0);
    CHECK(w.x() == 0.25);
    CHECK(w.elapsed() == doctest::Approx(0.0625));
    // climb to 0.5, return to the hub, switch to ray 1
    w.step(word_up());
    CHECK(w.y() == 0.5);
    w.step(word_down());
    w.step(word_down());
    CHECK(w.radius() == 0.0);
    w.step(word_up(ray_bits(0, 3)));
    CHECK(w.ray() == 1);
    CHECK(w.x() == -0.25); // ray 2 still carries the longest rib
    CHECK(w.ribs() == std::vector<double>{0.25, 0.5, 0.0});
    CHECK(w.reduced().z == -0.25);
}

TEST_CASE("walker: reduced-state views at prescribed rib configurations") {
    const Params p(3);
    SpiderWalker w(p, 0.1);
    w.reset_to(State(0.7, 1.0, -0.4));
    CHECK(w.x() == doctest::Approx(0.7));
    CHECK(w.y() == doctest::Approx(1.0));
    CHECK(w.z() == doctest::Approx(-0.4));
    CHECK(w.on_longest());
    CHECK(w.ribs() == std::vector<double>{1.0, 0.4, 0.0});

    w.reset_to(State(-0.4, 1.0, -0.4));
    CHECK(w.x() == doctest::Approx(-0.4));
    CHECK_FALSE(w.on_longest());
    CHECK(w.diameter() == doctest::Approx(1.4));

    w.reset();
    CHECK(w.reduced().x == 0.0);
    CHECK(w.reduced().y == 0.0);
    CHECK(w.reduced().z == 0.0);
}

TEST_CASE("walker: the signed coordinate jumps from -Y to +Y at a tie") {
    const Params p(2);
    SpiderWalker w(p, 0.5);
    w.reset_to(State(-0.5, 1.0, -0.5));
    CHECK(w.x() == -0.5);
    w.step(word_up());
    CHECK(w.x() == -1.0); // tie: lower ray index keeps the longest rib
    CHECK(w.y() == 1.0);
    w.step(word_up());
    CHECK(w.x() == 1.5); // overtake: the walker's rib is now the longest
    CHECK(w.y() == 1.5);
    CHECK(w.z() == -1.0);
    CHECK(w.diameter() == doctest::Approx(2.5));
}

TEST_CASE("walker: path invariants hold along a long random walk") {
    const Params p(3);
    SpiderWalker w(p, 0.125);
    Xoshiro256pp rng(99, 0);
    double prev_y = 0.0, prev_z = 0.0;
    for (int i = 0; i < 20000; ++i) {
        w.step(rng.next());
        const double x = w.x(), y = w.y(), z = w.z();
        REQUIRE(y >= prev_y);
        REQUIRE(z <= prev_z);
        REQUIRE(z <= x + 1e-12);
        REQUIRE(x <= y + 1e-12);
        REQUIRE(y + z >= -1e-12);
        REQUIRE(w.diameter() == doctest::Approx(y - z));
        prev_y = y;
        prev_z = z;
        if (i % 1000 == 0) CHECK_NOTHROW(w.reduced());
    }
}

TEST_CASE("run_path: fixed-time rules") {
    const Params p(3);
    const auto r0 = run_path(p, quick_cfg(1.0 / 16, 1), FixedTimeRule{0.0});
    CHECK(r0.tau == 0.0);
    CHECK(r0.payoff == 0.0);
    CHECK_FALSE(r0.capped);

    const auto r = run_path(p, quick_cfg(1.0 / 16, 1), FixedTimeRule{0.25});
    CHECK(r.tau == doctest::Approx(0.25));
    CHECK(r.d_tau == doctest::Approx(r.y_tau - r.z_tau));
    CHECK(r.payoff == doctest::Approx(r.d_tau - r.tau));
}

TEST_CASE("run_path: optimal rule stops inside the stopping region, tau > 0") {
    const Params p(3);
    const SimConfig cfg = quick_cfg(1.0 / 16, 1, 3);
    for (std::uint64_t i = 0; i < 50; ++i) {
        const auto r = run_path(p, cfg, OptimalRule{}, i);
        REQUIRE_FALSE(r.capped);
        REQUIRE(r.tau > 0.0);
        REQUIRE(in_stopping_region(p, State(r.x_tau, r.y_tau, r.z_tau)));
    }
}

TEST_CASE("run_path: first-hit-diameter stops at the level") {
    const Params p(2);
    const auto r = run_path(p, quick_cfg(1.0 / 32, 1, 5), FirstHitDiameterRule{1.0});
    CHECK(r.d_tau == doctest::Approx(1.0));
}

TEST_CASE("run_path: predicate rule sees reduced states") {
    const Params p(3);
    PredicateRule rule{[](const State& s, double) { return s.y >= 0.25; }};
    const auto r = run_path(p, quick_cfg(1.0 / 16, 1, 9), StoppingRule{rule});
    CHECK(r.y_tau == doctest::Approx(0.25));
}

TEST_CASE("run_path: bitwise-identical results for identical (seed, cfg, index)") {
    const Params p(3);
    const SimConfig cfg = quick_cfg(1.0 / 32, 1, 123);
    for (std::uint64_t i : {0ull, 7ull, 991ull}) {
        const auto a = run_path(p, cfg, OptimalRule{}, i);
        const auto b = run_path(p, cfg, OptimalRule{}, i);
        CHECK(a.tau == b.tau);
        CHECK(a.payoff == b.payoff);
        CHECK(a.x_tau == b.x_tau);
        CHECK(a.z_tau == b.z_tau);
    }
}

TEST_CASE("estimate_payoff: reproducibility and capping") {
    const Params p(2);
    const SimConfig cfg = quick_cfg(1.0 / 32, 4000, 77);
    const auto a = estimate_payoff(p, cfg, OptimalRule{});
    const auto b = estimate_payoff(p, cfg, OptimalRule{});
    CHECK(a.mean_payoff == b.mean_payoff); // bitwise: same seed, same cfg
    CHECK(a.stderr_payoff == b.stderr_payoff);
    SimConfig other = cfg;
    other.seed = 78;
    CHECK(estimate_payoff(p, other, OptimalRule{}).mean_payoff != a.mean_payoff);

    SimConfig capped = cfg;
    capped.max_steps = 10; // the band needs y >= 1/2: unreachable in 10 steps
    capped.num_paths = 16;
    CHECK_THROWS_AS(estimate_payoff(p, capped, OptimalRule{}), SimulationCapError);
}

TEST_CASE("estimate_payoff: optimal-rule means near the continuum values") {
    // band: 3 sigma + calibrated discretization allowance 2h (README)
    const double h = 1.0 / 32;
    {
        const auto est = estimate_payoff(Params(1), quick_cfg(h, 20000, 4), OptimalRule{});
        CHECK(std::abs(est.mean_payoff - 0.5) < 3 * est.stderr_payoff + 2 * h);
    }
    {
        const auto est = estimate_payoff(Params(2), quick_cfg(h, 20000, 4), OptimalRule{});
        CHECK(std::abs(est.mean_payoff - 0.75) < 3 * est.stderr_payoff + 2 * h);
        CHECK(est.capped == 0);
        CHECK(est.completed == 20000);
    }
}

TEST_CASE("estimate_payoff: antithetic pairing") {
    const Params p(2);
    SimConfig cfg = quick_cfg(1.0 / 32, 20000, 4);
    cfg.antithetic = true;
    const auto est = estimate_payoff(p, cfg, OptimalRule{});
    CHECK(est.samples == 10000);
    CHECK(est.completed == 20000);
    CHECK(std::abs(est.mean_payoff - 0.75) < 3 * est.stderr_payoff + 2.0 / 32);
}

TEST_CASE("skew_hit_fraction: the (n-1)/n excursion-sign probability") {
    for (int n : {2, 3, 5}) {
        const double frac = skew_hit_fraction(Params(n), quick_cfg(1.0 / 32, 20000, 12), 0.25);
        const double expect = (n - 1.0) / n;
        const double band = 5.0 * std::sqrt(expect * (1 - expect) / 20000.0);
        CHECK(std::abs(frac - expect) < band);
    }
    CHECK(skew_hit_fraction(Params(1), quick_cfg(1.0 / 32, 100, 12), 0.25) == 0.0);
}

TEST_CASE("zsigma_cdf_analytic: branch values") {
    const Params p3(3);
    CHECK(zsigma_cdf_analytic(p3, 0.0, 0.0, 0.0, -0.6) == 0.0);
    CHECK(zsigma_cdf_analytic(p3, 0.0, 0.0, 0.0, 0.0) == 1.0);
    CHECK(zsigma_cdf_analytic(p3, 0.0, 0.0, 0.0, -0.25) == doctest::Approx(0.4));
    // x >= 0 branch: (n-1)(1-2x)/(n-1-2s)
    CHECK(zsigma_cdf_analytic(p3, 0.1, 0.3, -0.2, -0.25) == doctest::Approx(2.0 * 0.8 / 2.5));
    // x < 0 branch: (n-1-2x)/(n-1-2s)
    CHECK(zsigma_cdf_analytic(p3, -0.1, 0.3, -0.2, -0.25) == doctest::Approx(2.2 / 2.5));
    // monotone and bounded
    double prev = 0.0;
    for (int i = 0; i <= 60; ++i) {
        const double s = -0.6 + 0.7 * i / 60.0;
        const double v = zsigma_cdf_analytic(p3, 0.1, 0.3, -0.2, s);
        CHECK(v >= prev - 1e-15);
        CHECK(v <= 1.0);
        prev = v;
    }
    CHECK_THROWS_AS(zsigma_cdf_analytic(p3, 0.0, 0.6, -0.2, 0.0), std::domain_error);
    CHECK_THROWS_AS(zsigma_cdf_analytic(Params(1), 0.0, 0.0, 0.0, 0.0), std::domain_error);
}

TEST_CASE("verify_zsigma: empirical law matches the five-branch CDF") {
    const Params p2(2);
    const auto rep = verify_zsigma(p2, quick_cfg(1.0 / 512, 10000, 21), State(0.0, 0.0, 0.0));
    CHECK(rep.num_samples == 10000);
    CHECK(rep.ks_distance < 0.03);

    // atom mass at the starting z
    const Params p3(3);
    const auto rep2 =
        verify_zsigma(p3, quick_cfg(1.0 / 256, 10000, 22), State(0.0, 0.25, -0.125));
    CHECK(std::abs(rep2.atom_at_start_empirical - rep2.atom_at_start_analytic) < 0.03);

    CHECK_THROWS_AS(verify_zsigma(Params(1), quick_cfg(1.0 / 64, 10, 1), State(0.0, 0.0, 0.0)),
                    std::domain_error);
    CHECK_THROWS_AS(verify_zsigma(p2, quick_cfg(1.0 / 64, 10, 1), State(0.5, 0.5, -0.5)),
                    std::domain_error);
}

TEST_CASE("verify_scaling: lambda = 1 and lambda = 2") {
    const Params p3(3);
    const auto r1 = verify_scaling(p3, quick_cfg(1.0 / 64, 4000, 31), 1.0, 0.25);
    CHECK(r1.max_standardized < 4.0);
    const auto r2 = verify_scaling(p3, quick_cfg(1.0 / 128, 4000, 32), 2.0, 0.5);
    CHECK(r2.max_standardized < 4.0);
    CHECK(r2.moments.size() == 6);
    // incompatible scaled grid: 0.5 not a multiple of 3 * h
    CHECK_THROWS_AS(verify_scaling(p3, quick_cfg(1.0 / 64, 100, 1), 3.0, 0.25),
                    std::invalid_argument);
}

TEST_CASE("parse_rule / rule_name") {
    CHECK(std::holds_alternative<OptimalRule>(parse_rule("optimal")));
    CHECK(std::get<FixedTimeRule>(parse_rule("fixed-time:0.5")).horizon == 0.5);
    CHECK(std::get<FirstHitDiameterRule>(parse_rule("first-hit-diameter:2")).diameter == 2.0);
    CHECK_THROWS_AS(parse_rule("bogus"), std::invalid_argument);
    CHECK_THROWS_AS(parse_rule("optimal:1"), std::invalid_argument);
    CHECK(rule_name(OptimalRule{}) == "optimal");
}

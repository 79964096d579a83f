#include "spider/boundary.hpp"
#include "spider/value.hpp"
#include "spider/verify.hpp"

#include <doctest.h>

#include <cmath>

using namespace spider;

TEST_CASE("phi: initial condition and closed forms") {
    for (int n = 2; n <= 8; ++n) {
        const BoundaryFn b{Params(n)};
        CHECK(b.phi(0.0) == doctest::Approx(-0.5).epsilon(1e-15));
    }
    const BoundaryFn b2{Params(2)};
    for (double s : {0.0, 0.3, 1.7, 5.0}) CHECK(b2.phi(s) == doctest::Approx(s - 0.5).epsilon(1e-15));

    const BoundaryFn b3{Params(3)};
    CHECK(std::abs(b3.phi(1.0) - 0.55181916175716348) < 1e-12);
    CHECK(std::abs(b3.phi(0.5) - -0.090204010431049865) < 1e-12);
    const BoundaryFn b5{Params(5)};
    CHECK(std::abs(b5.phi(0.5) - -0.15899412696446349) < 1e-12);
}

TEST_CASE("phi_prime: value at 0 and finite-difference agreement") {
    for (int n : {2, 3, 5, 8}) {
        const BoundaryFn b{Params(n)};
        CHECK(std::abs(b.phi_prime(0.0) - 1.0 / (n - 1)) < 1e-12);
        for (double s : {0.1, 0.8, 2.5}) {
            const double fd = (b.phi(s + 1e-6) - b.phi(s - 1e-6)) / 2e-6;
            CHECK(std::abs(b.phi_prime(s) - fd) < 1e-7);
        }
    }
}

TEST_CASE("f_lower: affine branch and inverse branch") {
    const BoundaryFn b3{Params(3)};
    CHECK(b3.f_lower(-0.5) == 0.0);
    CHECK(b3.f_lower(-0.7) == doctest::Approx(-0.2).epsilon(1e-15));
    CHECK(std::abs(b3.f_lower(-0.25) - 0.34251103822766664) < 1e-10);
    CHECK(std::abs(b3.f_lower(-0.1) - 0.49098048836535748) < 1e-10);
    CHECK(std::abs(b3.f_lower(0.0) - 0.58013139902597709) < 1e-10);

    const BoundaryFn b2{Params(2)};
    CHECK(b2.f_lower(-0.25) == doctest::Approx(0.25).epsilon(1e-15));

    const BoundaryFn b5{Params(5)};
    CHECK(std::abs(b5.f_lower(-0.25) - 0.41015354261167786) < 1e-10);
}

TEST_CASE("f_lower: round trip, monotonicity, knee continuity") {
    for (int n : {2, 3, 4, 6, 8}) {
        const BoundaryFn b{Params(n)};
        double prev = -1.0;
        for (int i = 0; i <= 200; ++i) {
            const double z = -0.499 + 0.499 * i / 200.0;
            const double f = b.f_lower(z);
            CHECK(std::abs(b.phi(f) - z) < 1e-10); // round trip
            CHECK(f > prev);                       // strictly increasing
            prev = f;
        }
        // strict monotonicity of phi on [0, 10]
        prev = b.phi(0.0);
        for (int i = 1; i <= 100; ++i) {
            const double s = 10.0 * i / 100.0;
            const double v = b.phi(s);
            CHECK(v > prev);
            prev = v;
        }
        // knee: both branches meet at f(-1/2) = 0
        CHECK(std::abs(b.f_lower(-0.5 - 1e-9)) < 1e-8);
        CHECK(std::abs(b.f_lower(-0.5 + 1e-9)) < 1e-8);
    }
}

TEST_CASE("f_lower: boundary ODE residual") {
    for (int n : {2, 3, 5, 8}) {
        const auto rep = verify::boundary_ode(ValueEvaluator{Params(n)});
        CHECK(rep.pass);
        CHECK(rep.worst < 1e-6);
    }
}

TEST_CASE("g_upper") {
    CHECK(BoundaryFn::g_upper(0.5) == 0.0);
    CHECK(BoundaryFn::g_upper(1.0) == 0.5);
    CHECK(BoundaryFn::g_upper(2.5) == 2.0);
    CHECK_THROWS_AS(BoundaryFn::g_upper(0.49), std::domain_error);
}

TEST_CASE("stage1_satisfied") {
    const BoundaryFn b2{Params(2)};
    CHECK_FALSE(b2.stage1_satisfied(0.4, -0.4));
    CHECK(b2.stage1_satisfied(1.0, -0.1)); // phi(0.5) = 0 >= -0.1
    const BoundaryFn b3{Params(3)};
    CHECK_FALSE(b3.stage1_satisfied(1.0, 0.0));  // phi(0.5) ~ -0.0902 < 0
    CHECK(b3.stage1_satisfied(1.0, -0.1));       // -0.1 <= -0.0902
}

TEST_CASE("domain errors") {
    const BoundaryFn b3{Params(3)};
    CHECK_THROWS_AS(b3.phi(-0.1), std::domain_error);
    CHECK_THROWS_AS(b3.f_lower(0.1), std::domain_error);
    const BoundaryFn b1{Params(1)};
    CHECK_THROWS_AS(b1.phi(1.0), std::domain_error);
}

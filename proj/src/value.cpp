#include "spider/value.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spider {

double v_onesided(double x, double y) {
    if (!(y >= x - kStateSlack) || !(y >= -kStateSlack))
        throw std::domain_error("v_onesided: requires y >= max(x, 0)");
    if (y - x >= 0.5) return y - x * x;
    return y * y + 0.25 - (2.0 * y - 1.0) * x;
}

double u_n1(double x, double y) {
    const double ax = std::abs(x);
    if (!(y >= ax)) throw std::domain_error("u_n1: requires y >= |x|");
    if (y < 0.5) return 0.5;
    return v_onesided(ax, y);
}

double u_n2(double x, double y, double z) {
    if (!state_in_domain(x, y, z))
        throw std::domain_error("u_n2: state outside the reduced state space");
    if (y - z < 1.0)
        return y - z - x * (y + z) + 0.5 * ((y - 1.0) * (y - 1.0) + (z + 1.0) * (z + 1.0)) - 0.25;
    if (y - x < x - z) return v_onesided(x, y) - z;
    return v_onesided(-x, -z) + y;
}

const char* region_name(Region r) {
    switch (r) {
        case Region::R1B1: return "R1b1";
        case Region::R1B2: return "R1b2";
        case Region::R1B3: return "R1b3";
        case Region::R1B4: return "R1b4";
        case Region::R1B5: return "R1b5";
        case Region::R2: return "R2";
        case Region::R3: return "R3";
        case Region::N1: return "N1";
    }
    return "?";
}

ValueEvaluator::ValueEvaluator(Params params, EvaluatorConfig cfg)
    : params_(params), cfg_(cfg), boundary_(params, cfg.root) {
    if (cfg_.table_nodes < 9) throw std::invalid_argument("ValueEvaluator: table_nodes too small");
    if (params_.n == 1) {
        u000_ = 0.5;
        return;
    }
    build_table();
    const double n = params_.n;
    u000_ = 2.0 * n * (n - 1.0) *
            integrate([this, n](double s) { return cheb_eval(s) / ((n - 1.0 - 2.0 * s) * (n - 1.0 - 2.0 * s)); },
                      -0.5, 0.0, cfg_.quadrature)
                .value;
}

double ValueEvaluator::evaluate(const State& s) const {
    if (params_.n == 1) return u_n1(s.x, s.y);
    return u_general(s);
}

Region ValueEvaluator::classify(const State& s) const {
    if (params_.n == 1) return Region::N1;
    if (s.y >= 0.5) {
        if (s.z <= boundary_.phi(s.y - 0.5)) {
            Region which;
            region1(s.x, s.y, s.z, &which);
            return which;
        }
        return Region::R2;
    }
    return Region::R3;
}

double ValueEvaluator::u_general(const State& s) const {
    if (params_.n < 2) throw std::domain_error("u_general: requires n >= 2");
    if (s.y >= 0.5) {
        if (s.z <= boundary_.phi(s.y - 0.5)) return region1(s.x, s.y, s.z);
        return region2(s.x, s.y, s.z);
    }
    return region3(s.x, s.y, s.z);
}

double ValueEvaluator::u_y_partial(const State& s) const {
    if (params_.n < 2) throw std::domain_error("u_y_partial: requires n >= 2");
    if (!(s.y >= 0.5) || !(s.z > boundary_.phi(s.y - 0.5)))
        throw std::domain_error("u_y_partial: state outside y >= 1/2, z > phi(y - 1/2)");
    const double n = params_.n;
    const double den = band_denominator(s.y);
    if (s.x >= 0.0) return (n - 1.0) * (s.y - s.x) / den;
    return ((n - 1.0) * s.y - s.x) / den;
}

double ValueEvaluator::u_half_half(double s) const {
    if (s < -0.5 - kStateSlack || s > kStateSlack)
        throw std::domain_error("u_half_half: requires s in [-1/2, 0]");
    if (params_.n < 2) throw std::domain_error("u_half_half: requires n >= 2");
    return cheb_eval(std::min(0.0, std::max(-0.5, s)));
}

double ValueEvaluator::u_half_half_direct(double s) const {
    if (s < -0.5 - kStateSlack || s > kStateSlack)
        throw std::domain_error("u_half_half_direct: requires s in [-1/2, 0]");
    if (params_.n < 2) throw std::domain_error("u_half_half_direct: requires n >= 2");
    s = std::min(0.0, std::max(-0.5, s));
    const double n = params_.n;
    const double f = boundary_.f_lower(s);
    const double ystar = f + 0.5;
    const double anchor = region1(0.5, ystar, s);
    if (ystar <= 0.5) return anchor; // s = -1/2: the band just opened at y = 1/2
    const double integral =
        integrate([this, n](double t) { return (n - 1.0) * (t - 0.5) / band_denominator(t); }, 0.5,
                  ystar, cfg_.quadrature)
            .value;
    return anchor - integral;
}

double ValueEvaluator::best_constant() const {
    if (params_.n == 1) return std::numbers::sqrt2;
    if (params_.n == 2) return std::numbers::sqrt3;
    return 2.0 * std::sqrt(u000_);
}

double ValueEvaluator::region1(double x, double y, double z, Region* which) const {
    const double n = params_.n;
    const double f = boundary_.f_lower(z);
    if (f <= 0.0) {
        // z <= -1/2, affine branch f = z + 1/2; only the outer branches exist
        if (x <= f) {
            if (which) *which = Region::R1B1;
            return y - z - 2.0 * f * x + f * f;
        }
    } else {
        if (x <= 0.0) {
            if (which) *which = Region::R1B2;
            return y - z - 2.0 * f / (n - 1.0) * x + f * f;
        }
        if (x <= f) {
            if (which) *which = Region::R1B3;
            return y - z - 2.0 * f * x + f * f;
        }
    }
    if (x <= y - 0.5) {
        if (which) *which = Region::R1B4;
        return y - z - x * x; // stopping band: U equals the gain
    }
    if (which) *which = Region::R1B5;
    const double g = y - 0.5;
    return y - z - 2.0 * g * x + g * g;
}

double ValueEvaluator::region2(double x, double y, double z) const {
    const double n = params_.n;
    const double f = boundary_.f_lower(z);
    const double ystar = f + 0.5; // seam height: z = phi(ystar - 1/2)
    const double anchor = region1(x, ystar, z);
    if (ystar <= y) return anchor;
    std::function<double(double)> integrand;
    if (x >= 0.0)
        integrand = [this, n, x](double s) { return (n - 1.0) * (s - x) / band_denominator(s); };
    else
        integrand = [this, n, x](double s) { return ((n - 1.0) * s - x) / band_denominator(s); };
    return anchor - integrate(integrand, y, ystar, cfg_.quadrature).value;
}

double ValueEvaluator::region3(double x, double y, double z) const {
    const double n = params_.n;
    double t1, t2, k2;
    if (x >= 0.0) {
        t1 = cheb_eval(-y) * 2.0 * (n - 1.0) * (y - x) / (n - 1.0 + 2.0 * y);
        t2 = cheb_eval(z) * 2.0 * ((n - 1.0) * x - z) / (n - 1.0 - 2.0 * z);
        k2 = 2.0 * (n - 1.0) * (1.0 - 2.0 * x);
    } else {
        t1 = cheb_eval(-y) * 2.0 * ((n - 1.0) * y - x) / (n - 1.0 + 2.0 * y);
        t2 = cheb_eval(z) * 2.0 * (x - z) / (n - 1.0 - 2.0 * z);
        k2 = 2.0 * (n - 1.0 - 2.0 * x);
    }
    const double i1 =
        integrate([this, n](double s) { return cheb_eval(s) * 2.0 * n * (n - 1.0) / ((n - 1.0 - 2.0 * s) * (n - 1.0 - 2.0 * s)); },
                  -0.5, -y, cfg_.quadrature)
            .value;
    double i2 = 0.0;
    if (z > -y)
        i2 = integrate([this, n, k2](double s) { return cheb_eval(s) * k2 / ((n - 1.0 - 2.0 * s) * (n - 1.0 - 2.0 * s)); },
                       -y, z, cfg_.quadrature)
                 .value;
    return t1 + t2 + i1 + i2;
}

double ValueEvaluator::band_denominator(double s) const {
    return (params_.n - 1.0) * s - boundary_.phi(s - 0.5);
}

double ValueEvaluator::cheb_eval(double s) const {
    // map [-1/2, 0] -> [-1, 1], Clenshaw on the truncated series
    double t = 4.0 * s + 1.0;
    t = std::min(1.0, std::max(-1.0, t));
    double b1 = 0.0, b2 = 0.0;
    for (std::size_t j = coeffs_.size(); j-- > 1;) {
        const double b0 = coeffs_[j] + 2.0 * t * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    return coeffs_[0] + t * b1 - b2;
}

void ValueEvaluator::build_table() {
    const int nodes = cfg_.table_nodes;
    const int N = nodes - 1;
    const double pi = std::numbers::pi;

    table_.resize(nodes);
    std::vector<double> v(nodes);
    for (int k = 0; k <= N; ++k) {
        const double s = -0.25 + 0.25 * std::cos(pi * k / N);
        const double val = u_half_half_direct(s);
        table_[k] = {s, val};
        v[k] = val;
    }

    // Chebyshev coefficients via the DCT-I sums, with a cosine table so the
    // O(N^2) pass stays cheap.
    std::vector<double> cosn(2 * N);
    for (int m = 0; m < 2 * N; ++m) cosn[m] = std::cos(pi * m / N);

    std::vector<double> a(nodes);
    for (int j = 0; j <= N; ++j) {
        double acc = 0.5 * (v[0] + ((j % 2 == 0) ? v[N] : -v[N]));
        for (int k = 1; k < N; ++k)
            acc += v[k] * cosn[static_cast<std::size_t>(j) * k % (2 * N)];
        a[j] = (j == 0 || j == N ? 1.0 : 2.0) * acc / N;
    }

    // Drop the tail where the true coefficients sink below the quadrature
    // noise floor of the node values; the dropped mass stays an order below
    // the 1e-10 interpolation budget. The retained order is the
    // interpolation order.
    double tail = 0.0;
    int keep = N + 1;
    for (int j = N; j >= 8; --j) {
        tail += std::abs(a[j]);
        if (tail >= 2e-11) break;
        keep = j;
    }
    coeffs_.assign(a.begin(), a.begin() + keep);
}

} // namespace spider

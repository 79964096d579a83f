#include "spider/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

namespace spider {

namespace {

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1] (QUADPACK dqk15).
// kXgk[7] = 0 is the center; Gauss points sit at the odd indices.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Panel {
    double a, b;
    double value;
    double error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gk15(const std::function<double(double)>& fn, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    const double fc = fn(center);
    double resg = fc * kWg[3];
    double resk = fc * kWgk[7];
    double resabs = std::abs(resk);

    std::array<double, 7> flo{}, fhi{};
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        flo[j] = fn(center - dx);
        fhi[j] = fn(center + dx);
        const double fsum = flo[j] + fhi[j];
        resk += kWgk[j] * fsum;
        resabs += kWgk[j] * (std::abs(flo[j]) + std::abs(fhi[j]));
        if (j % 2 == 1) resg += kWg[j / 2] * fsum;
    }

    const double reskh = resk * 0.5;
    double resasc = kWgk[7] * std::abs(fc - reskh);
    for (int j = 0; j < 7; ++j)
        resasc += kWgk[j] * (std::abs(flo[j] - reskh) + std::abs(fhi[j] - reskh));

    const double ahalf = std::abs(half);
    resabs *= ahalf;
    resasc *= ahalf;
    double err = std::abs((resk - resg) * half);
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    const double eps50 = 50.0 * std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / eps50)
        err = std::max(eps50 * resabs, err);

    return Panel{a, b, resk * half, err};
}

} // namespace

IntegralResult integrate(const std::function<double(double)>& fn, double a, double b,
                         const QuadratureConfig& cfg) {
    if (!(cfg.abs_tol > 0.0) || !(cfg.rel_tol > 0.0) || cfg.max_subdivisions < 1)
        throw std::invalid_argument("integrate: invalid QuadratureConfig");
    if (!(a <= b)) throw std::invalid_argument("integrate: requires a <= b");
    if (a == b) return {0.0, 0.0};

    std::priority_queue<Panel> panels;
    Panel whole = gk15(fn, a, b);
    double value = whole.value;
    double error = whole.error;
    panels.push(whole);

    int splits = 0;
    while (error > std::max(cfg.abs_tol, cfg.rel_tol * std::abs(value))) {
        if (splits >= cfg.max_subdivisions || !std::isfinite(value))
            throw ToleranceError("integrate: tolerance not reached after max subdivisions");
        Panel worst = panels.top();
        panels.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            // interval at floating-point resolution; put it back and stop splitting
            panels.push(worst);
            throw ToleranceError("integrate: interval exhausted at machine resolution");
        }
        Panel left = gk15(fn, worst.a, mid);
        Panel right = gk15(fn, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        panels.push(left);
        panels.push(right);
        ++splits;
    }
    if (!std::isfinite(value))
        throw ToleranceError("integrate: integrand produced a non-finite value");
    return {value, error};
}

double find_root(const std::function<double(double)>& fn, double lo, double hi,
                 const RootConfig& cfg, const std::function<double(double)>& derivative) {
    if (!(cfg.abs_tol > 0.0) || cfg.max_iterations < 1)
        throw std::invalid_argument("find_root: invalid RootConfig");
    if (!(lo <= hi)) throw std::invalid_argument("find_root: requires lo <= hi");

    double flo = fn(lo);
    if (flo == 0.0) return lo;
    double fhi = fn(hi);
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw std::invalid_argument("find_root: endpoints do not bracket a sign change");

    int iters = 0;
    // Bisection down to a narrow bracket, guaranteed by monotone shrinkage.
    const double coarse = std::max(cfg.abs_tol, 1e-4);
    while (hi - lo > coarse) {
        if (++iters > cfg.max_iterations)
            throw ToleranceError("find_root: iteration budget exhausted");
        const double mid = 0.5 * (lo + hi);
        const double fmid = fn(mid);
        if (fmid == 0.0) return mid;
        if ((fmid > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
            fhi = fmid;
        }
    }

    // Newton/secant polish, clamped to the bracket; fall back to bisection
    // whenever a step leaves it.
    double x = 0.5 * (lo + hi);
    double fx = fn(x);
    while (hi - lo > cfg.abs_tol) {
        if (++iters > cfg.max_iterations)
            throw ToleranceError("find_root: iteration budget exhausted");
        if (fx == 0.0) return x;
        if ((fx > 0.0) == (flo > 0.0)) {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
        double next;
        if (derivative) {
            const double d = derivative(x);
            next = (d != 0.0) ? x - fx / d : 0.5 * (lo + hi);
        } else {
            const double denom = fhi - flo;
            next = (denom != 0.0) ? lo - flo * (hi - lo) / denom : 0.5 * (lo + hi);
        }
        if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
        x = next;
        fx = fn(x);
    }
    return 0.5 * (lo + hi);
}

} // namespace spider

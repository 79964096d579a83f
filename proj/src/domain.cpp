#include "spider/domain.hpp"

#include "spider/boundary.hpp"

#include <cmath>
#include <stdexcept>

namespace spider {

Params::Params(int rays) : n(rays) {
    if (rays < 1) throw std::domain_error("Params: number of rays must be >= 1");
}

State::State(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {
    if (!state_in_domain(x, y, z))
        throw std::domain_error("State: (x, y, z) outside the reduced state space");
}

bool state_in_domain(double x, double y, double z, double slack) {
    if (!(std::isfinite(x) && std::isfinite(y) && std::isfinite(z))) return false;
    return z <= slack && y >= -slack && z <= x + slack && x <= y + slack && y + z >= -slack;
}

double gain(const State& s) { return s.y - s.z - s.x * s.x; }

bool in_stopping_region(const Params& params, const State& s) {
    if (params.n == 1) return s.y - std::abs(s.x) >= 0.5 - kStateSlack;
    return in_stopping_region(BoundaryFn(params), s);
}

// Boundary ties stop (the region is closed); comparisons carry the state slack.
bool in_stopping_region(const BoundaryFn& boundary, const State& s) {
    if (boundary.params().n == 1) return s.y - std::abs(s.x) >= 0.5 - kStateSlack;
    if (s.y < 0.5 - kStateSlack) return false; // the band f(z) <= x <= y - 1/2 is empty
    return boundary.f_lower(s.z) - kStateSlack <= s.x && s.x <= s.y - 0.5 + kStateSlack;
}

} // namespace spider

#include "spider/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace spider {

namespace {

std::int64_t to_units(double v, double h, const char* what) {
    const double r = v / h;
    const auto k = static_cast<std::int64_t>(std::llround(r));
    if (std::abs(r - static_cast<double>(k)) > 1e-9 * std::max(1.0, std::abs(r)))
        throw std::invalid_argument(std::string("coordinate not on the step grid: ") + what);
    return k;
}

/// Neumaier compensated accumulator, so aggregation is order-independent in
/// practice and merging partial sums stays exact to double precision.
struct Neumaier {
    double sum = 0.0, comp = 0.0;
    void add(double v) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
    void merge(const Neumaier& o) {
        add(o.sum);
        add(o.comp);
    }
};

struct Accum {
    Neumaier payoff, payoff2, tau, tau2, d, d2, dtau;
    std::uint64_t samples = 0;   // statistical units (pairs when antithetic)
    std::uint64_t completed = 0; // completed paths
    std::uint64_t capped = 0;
    void add_sample(double p, double t, double dd) {
        payoff.add(p);
        payoff2.add(p * p);
        tau.add(t);
        tau2.add(t * t);
        d.add(dd);
        d2.add(dd * dd);
        dtau.add(dd * t);
        ++samples;
    }
    void merge(const Accum& o) {
        payoff.merge(o.payoff);
        payoff2.merge(o.payoff2);
        tau.merge(o.tau);
        tau2.merge(o.tau2);
        d.merge(o.d);
        d2.merge(o.d2);
        dtau.merge(o.dtau);
        samples += o.samples;
        completed += o.completed;
        capped += o.capped;
    }
};

PathResult finish(const SpiderWalker& w, bool capped) {
    PathResult r;
    r.tau = w.elapsed();
    r.d_tau = w.diameter();
    r.payoff = r.d_tau - r.tau;
    r.x_tau = w.x();
    r.y_tau = w.y();
    r.z_tau = w.z();
    r.capped = capped;
    return r;
}

template <class Check>
PathResult run_one(const SimConfig& cfg, const Check& check, std::uint64_t path_index,
                   SpiderWalker& w) {
    w.reset();
    const std::uint64_t stream = cfg.antithetic ? (path_index >> 1) : path_index;
    const std::uint64_t flip = (cfg.antithetic && (path_index & 1)) ? ~0ull : 0ull;
    Xoshiro256pp rng(cfg.seed, stream);
    while (!check.stop(w)) {
        if (w.steps() >= cfg.max_steps) return finish(w, true);
        w.step(rng.next() ^ flip);
    }
    return finish(w, false);
}

struct OptimalCheck {
    int n;
    double h;
    std::int64_t half_units;
    BoundaryFn boundary;
    std::vector<double> f_grid; // f(-k*h) for k = 0, 1, ...

    bool stop(const SpiderWalker& w) const {
        if (n == 1) return w.best_units() - w.radius_units() >= half_units;
        if (w.best_units() < half_units) return false;
        if (w.on_longest() && w.radius_units() > w.best_units() - half_units) return false;
        return w.x() >= f_at(w.second_units()) - kStateSlack;
    }
    double f_at(std::int64_t k) const {
        return k < static_cast<std::int64_t>(f_grid.size())
                   ? f_grid[static_cast<std::size_t>(k)]
                   : boundary.f_lower(-static_cast<double>(k) * h);
    }
};

struct FixedTimeCheck {
    std::uint64_t target_steps;
    bool stop(const SpiderWalker& w) const { return w.steps() >= target_steps; }
};

struct FirstHitCheck {
    int n;
    std::int64_t d_units;
    bool stop(const SpiderWalker& w) const {
        const std::int64_t d = n > 1 ? w.best_units() + w.second_units() : w.best_units();
        return d >= d_units;
    }
};

struct PredicateCheck {
    const PredicateRule* rule;
    bool stop(const SpiderWalker& w) const { return rule->stop(w.reduced(), w.elapsed()); }
};

OptimalCheck make_check(const Params& params, const SimConfig& cfg, const OptimalRule&) {
    OptimalCheck c{params.n, cfg.step, to_units(0.5, cfg.step, "1/2"), BoundaryFn(params), {}};
    if (params.n > 1) {
        const auto count = static_cast<std::size_t>(16.0 / cfg.step) + 2;
        c.f_grid.resize(count);
        for (std::size_t k = 0; k < count; ++k)
            c.f_grid[k] = c.boundary.f_lower(-static_cast<double>(k) * cfg.step);
    }
    return c;
}

FixedTimeCheck make_check(const Params&, const SimConfig& cfg, const FixedTimeRule& r) {
    if (r.horizon < 0.0) throw std::invalid_argument("fixed-time rule: horizon must be >= 0");
    const double steps = r.horizon / (cfg.step * cfg.step);
    return FixedTimeCheck{static_cast<std::uint64_t>(std::llround(steps))};
}

FirstHitCheck make_check(const Params& params, const SimConfig& cfg, const FirstHitDiameterRule& r) {
    if (!(r.diameter > 0.0)) throw std::invalid_argument("first-hit-diameter rule: d must be > 0");
    const auto units = static_cast<std::int64_t>(std::ceil(r.diameter / cfg.step - 1e-9));
    return FirstHitCheck{params.n, units};
}

PredicateCheck make_check(const Params&, const SimConfig&, const PredicateRule& r) {
    if (!r.stop) throw std::invalid_argument("predicate rule: empty predicate");
    return PredicateCheck{&r};
}

int effective_threads(const SimConfig& cfg, std::uint64_t paths) {
    int t = cfg.threads;
    if (t <= 0) t = static_cast<int>(std::thread::hardware_concurrency());
    if (t < 1) t = 1;
    return static_cast<int>(std::min<std::uint64_t>(static_cast<std::uint64_t>(t), paths));
}

template <class Check>
Accum run_range(const Params& params, const SimConfig& cfg, const Check& check, std::uint64_t lo,
                std::uint64_t hi) {
    SpiderWalker w(params, cfg.step);
    Accum acc;
    if (!cfg.antithetic) {
        for (std::uint64_t i = lo; i < hi; ++i) {
            const PathResult r = run_one(cfg, check, i, w);
            if (r.capped) {
                ++acc.capped;
                continue;
            }
            ++acc.completed;
            acc.add_sample(r.payoff, r.tau, r.d_tau);
        }
    } else {
        for (std::uint64_t i = lo; i < hi; i += 2) {
            const PathResult a = run_one(cfg, check, i, w);
            const PathResult b = run_one(cfg, check, i + 1, w);
            acc.capped += static_cast<std::uint64_t>(a.capped) + static_cast<std::uint64_t>(b.capped);
            if (a.capped || b.capped) continue;
            acc.completed += 2;
            acc.add_sample(0.5 * (a.payoff + b.payoff), 0.5 * (a.tau + b.tau),
                           0.5 * (a.d_tau + b.d_tau));
        }
    }
    return acc;
}

template <class Check>
EstimateResult estimate_impl(const Params& params, const SimConfig& cfg, const Check& check) {
    const int threads = effective_threads(cfg, cfg.num_paths);
    std::vector<Accum> parts(static_cast<std::size_t>(threads));
    if (threads == 1) {
        parts[0] = run_range(params, cfg, check, 0, cfg.num_paths);
    } else {
        std::vector<std::thread> pool;
        std::uint64_t chunk = (cfg.num_paths + threads - 1) / threads;
        if (cfg.antithetic) chunk += chunk & 1; // keep pairs together
        for (int t = 0; t < threads; ++t) {
            const std::uint64_t lo = std::min(cfg.num_paths, chunk * static_cast<std::uint64_t>(t));
            const std::uint64_t hi = std::min(cfg.num_paths, lo + chunk);
            pool.emplace_back([&, t, lo, hi] { parts[static_cast<std::size_t>(t)] = run_range(params, cfg, check, lo, hi); });
        }
        for (auto& th : pool) th.join();
    }
    Accum total;
    for (const auto& p : parts) total.merge(p);

    if (total.samples == 0)
        throw SimulationCapError("estimate_payoff: every path hit the step cap");

    const auto N = static_cast<double>(total.samples);
    EstimateResult out;
    out.samples = total.samples;
    out.completed = total.completed;
    out.capped = total.capped;
    out.mean_payoff = total.payoff.value() / N;
    out.mean_tau = total.tau.value() / N;
    out.mean_d = total.d.value() / N;
    if (total.samples > 1) {
        auto var = [N](const Neumaier& sq, double mean) {
            return std::max(0.0, (sq.value() - N * mean * mean) / (N - 1.0));
        };
        out.stderr_payoff = std::sqrt(var(total.payoff2, out.mean_payoff) / N);
        out.stderr_tau = std::sqrt(var(total.tau2, out.mean_tau) / N);
        out.stderr_d = std::sqrt(var(total.d2, out.mean_d) / N);
        out.cov_d_tau = (total.dtau.value() - N * out.mean_d * out.mean_tau) / (N - 1.0);
    }
    return out;
}

} // namespace

void validate(const SimConfig& cfg) {
    if (!(cfg.step > 0.0)) throw std::invalid_argument("SimConfig: step must be > 0");
    const double r = 0.5 / cfg.step;
    if (std::abs(r - std::round(r)) > 1e-9)
        throw std::invalid_argument("SimConfig: 1/2 must be an integer multiple of the step");
    if (cfg.num_paths < 1) throw std::invalid_argument("SimConfig: num_paths must be >= 1");
    if (cfg.antithetic && (cfg.num_paths % 2) != 0)
        throw std::invalid_argument("SimConfig: antithetic pairing needs an even number of paths");
    if (cfg.max_steps < 1) throw std::invalid_argument("SimConfig: max_steps must be >= 1");
}

void SpiderWalker::reset() {
    std::fill(ribs_.begin(), ribs_.end(), 0);
    ray_ = 0;
    radius_ = 0;
    cur_rib_ = 0;
    best_ = 0;
    second_ = 0;
    best_ray_ = 0;
    steps_ = 0;
}

void SpiderWalker::reset_to(const State& s) {
    reset();
    const std::int64_t yu = to_units(s.y, h_, "y");
    if (n_ == 1) {
        if (s.z != 0.0)
            throw std::invalid_argument("SpiderWalker: n = 1 states carry z = 0");
        ribs_[0] = yu;
        best_ = yu;
        radius_ = to_units(s.x, h_, "x");
        cur_rib_ = yu;
        return;
    }
    const std::int64_t zu = to_units(-s.z, h_, "z");
    ribs_[0] = yu;
    ribs_[1] = zu;
    best_ = yu;
    second_ = zu;
    if (s.x >= 0.0) {
        ray_ = 0;
        radius_ = to_units(s.x, h_, "x");
    } else {
        ray_ = 1;
        radius_ = to_units(-s.x, h_, "x");
    }
    cur_rib_ = ribs_[static_cast<std::size_t>(ray_)];
}

std::vector<double> SpiderWalker::ribs() const {
    std::vector<double> out(ribs_.size());
    for (std::size_t i = 0; i < ribs_.size(); ++i) out[i] = static_cast<double>(ribs_[i]) * h_;
    return out;
}

StoppingRule parse_rule(const std::string& text) {
    const auto colon = text.find(':');
    const std::string head = text.substr(0, colon);
    if (head == "optimal") {
        if (colon != std::string::npos) throw std::invalid_argument("rule 'optimal' takes no argument");
        return OptimalRule{};
    }
    if (colon == std::string::npos)
        throw std::invalid_argument("unknown stopping rule: " + text);
    const double arg = std::stod(text.substr(colon + 1));
    if (head == "fixed-time") return FixedTimeRule{arg};
    if (head == "first-hit-diameter") return FirstHitDiameterRule{arg};
    throw std::invalid_argument("unknown stopping rule: " + text);
}

std::string rule_name(const StoppingRule& rule) {
    struct Namer {
        std::string operator()(const OptimalRule&) const { return "optimal"; }
        std::string operator()(const FixedTimeRule& r) const {
            return "fixed-time:" + std::to_string(r.horizon);
        }
        std::string operator()(const FirstHitDiameterRule& r) const {
            return "first-hit-diameter:" + std::to_string(r.diameter);
        }
        std::string operator()(const PredicateRule&) const { return "predicate"; }
    };
    return std::visit(Namer{}, rule);
}

PathResult run_path(const Params& params, const SimConfig& cfg, const StoppingRule& rule,
                    std::uint64_t path_index) {
    validate(cfg);
    return std::visit(
        [&](const auto& r) {
            SpiderWalker w(params, cfg.step);
            const auto check = make_check(params, cfg, r);
            return run_one(cfg, check, path_index, w);
        },
        rule);
}

EstimateResult estimate_payoff(const Params& params, const SimConfig& cfg, const StoppingRule& rule) {
    validate(cfg);
    if (cfg.num_paths < 2) throw std::invalid_argument("estimate_payoff: num_paths must be >= 2");
    return std::visit([&](const auto& r) { return estimate_impl(params, cfg, make_check(params, cfg, r)); },
                      rule);
}

double zsigma_cdf_analytic(const Params& params, double x, double y, double z, double s) {
    if (params.n < 2) throw std::domain_error("zsigma_cdf_analytic: requires n >= 2");
    if (!(y < 0.5)) throw std::domain_error("zsigma_cdf_analytic: requires y < 1/2");
    if (!state_in_domain(x, y, z)) throw std::domain_error("zsigma_cdf_analytic: state outside domain");
    const double n = params.n;
    if (s < -0.5) return 0.0;
    if (s >= z) return 1.0;
    if (s >= -y) {
        if (x >= 0.0) return (n - 1.0) * (1.0 - 2.0 * x) / (n - 1.0 - 2.0 * s);
        return (n - 1.0 - 2.0 * x) / (n - 1.0 - 2.0 * s);
    }
    return (n - 1.0) * (1.0 + 2.0 * s) / (n - 1.0 - 2.0 * s);
}

double zsigma_cdf_left(const Params& params, double x, double y, double z, double s) {
    if (params.n < 2) throw std::domain_error("zsigma_cdf_left: requires n >= 2");
    const double n = params.n;
    if (s <= -0.5) return 0.0;
    if (s > z) return 1.0;
    if (s > -y) {
        if (x >= 0.0) return (n - 1.0) * (1.0 - 2.0 * x) / (n - 1.0 - 2.0 * s);
        return (n - 1.0 - 2.0 * x) / (n - 1.0 - 2.0 * s);
    }
    return (n - 1.0) * (1.0 + 2.0 * s) / (n - 1.0 - 2.0 * s);
}

ZsigmaReport verify_zsigma(const Params& params, const SimConfig& cfg, const State& start) {
    validate(cfg);
    if (params.n < 2) throw std::domain_error("verify_zsigma: requires n >= 2");
    if (!(start.y < 0.5)) throw std::domain_error("verify_zsigma: requires start.y < 1/2");

    const std::int64_t half_units = to_units(0.5, cfg.step, "1/2");
    std::vector<double> samples;
    samples.reserve(cfg.num_paths);
    std::uint64_t capped = 0;

    SpiderWalker w(params, cfg.step);
    for (std::uint64_t i = 0; i < cfg.num_paths; ++i) {
        w.reset_to(start);
        Xoshiro256pp rng(cfg.seed, i);
        bool ok = true;
        while (w.best_units() < half_units) {
            if (w.steps() >= cfg.max_steps) {
                ok = false;
                break;
            }
            w.step(rng.next());
        }
        if (ok)
            samples.push_back(w.z());
        else
            ++capped;
    }
    if (samples.empty()) throw SimulationCapError("verify_zsigma: every path hit the step cap");
    std::sort(samples.begin(), samples.end());

    const auto N = static_cast<double>(samples.size());
    auto emp_le = [&](double c) {
        return static_cast<double>(std::upper_bound(samples.begin(), samples.end(), c) -
                                   samples.begin()) / N;
    };
    auto emp_lt = [&](double c) {
        return static_cast<double>(std::lower_bound(samples.begin(), samples.end(), c) -
                                   samples.begin()) / N;
    };

    std::vector<double> candidates = samples;
    candidates.push_back(-0.5);
    candidates.push_back(-start.y);
    candidates.push_back(start.z);

    double ks = 0.0;
    for (double c : candidates) {
        const double hi = std::abs(zsigma_cdf_analytic(params, start.x, start.y, start.z, c) - emp_le(c));
        const double lo = std::abs(zsigma_cdf_left(params, start.x, start.y, start.z, c) - emp_lt(c));
        ks = std::max(ks, std::max(hi, lo));
    }

    ZsigmaReport rep;
    rep.ks_distance = ks;
    rep.num_samples = samples.size();
    rep.capped = capped;
    rep.atom_at_start_empirical = emp_le(start.z) - emp_lt(start.z);
    rep.atom_at_start_analytic =
        1.0 - zsigma_cdf_left(params, start.x, start.y, start.z, start.z);
    return rep;
}

ScalingReport verify_scaling(const Params& params, const SimConfig& cfg, double lambda,
                             double horizon, const State& start) {
    validate(cfg);
    if (!(lambda > 0.0)) throw std::invalid_argument("verify_scaling: lambda must be > 0");
    if (!(horizon > 0.0)) throw std::invalid_argument("verify_scaling: horizon must be > 0");

    SimConfig cfg_scaled = cfg;
    cfg_scaled.step = lambda * cfg.step;
    validate(cfg_scaled); // scaled thresholds must stay grid-compatible

    const double steps_real = horizon / (cfg_scaled.step * cfg_scaled.step);
    const auto steps = static_cast<std::uint64_t>(std::llround(steps_real));
    if (std::abs(steps_real - static_cast<double>(steps)) > 1e-6)
        throw std::invalid_argument("verify_scaling: horizon not an integer number of steps");

    const State start_scaled(lambda * start.x, lambda * start.y, lambda * start.z);

    struct Moments {
        Neumaier m[6], m2[6];
        std::uint64_t count = 0;
        void add(double x, double y, double z) {
            const double v[6] = {x, y, z, x * x, y * y, z * z};
            for (int i = 0; i < 6; ++i) {
                m[i].add(v[i]);
                m2[i].add(v[i] * v[i]);
            }
            ++count;
        }
    };

    auto run_ensemble = [&](const SimConfig& c, const State& s0, double scale,
                            std::uint64_t stream_base) {
        Moments mo;
        SpiderWalker w(params, c.step);
        for (std::uint64_t i = 0; i < c.num_paths; ++i) {
            w.reset_to(s0);
            Xoshiro256pp rng(c.seed, stream_base + i);
            for (std::uint64_t k = 0; k < steps; ++k) w.step(rng.next());
            mo.add(scale * w.x(), scale * w.y(), scale * w.z());
        }
        return mo;
    };

    // (a) the lambda-scaled process observed at horizon/lambda^2 on the fine
    // grid; (b) the process started at the scaled state on the coarse grid.
    const Moments a = run_ensemble(cfg, start, lambda, 0);
    const Moments b = run_ensemble(cfg_scaled, start_scaled, 1.0, cfg.num_paths);

    static const char* names[6] = {"E[X]", "E[Y]", "E[Z]", "E[X^2]", "E[Y^2]", "E[Z^2]"};
    ScalingReport rep;
    rep.paths = cfg.num_paths;
    for (int i = 0; i < 6; ++i) {
        const double na = static_cast<double>(a.count), nb = static_cast<double>(b.count);
        const double ma = a.m[i].value() / na, mb = b.m[i].value() / nb;
        const double va = std::max(0.0, a.m2[i].value() / na - ma * ma);
        const double vb = std::max(0.0, b.m2[i].value() / nb - mb * mb);
        const double se = std::sqrt(va / na + vb / nb);
        MomentDiff d;
        d.name = names[i];
        d.scaled = ma;
        d.direct = mb;
        d.std_err = se;
        d.standardized = se > 0.0 ? std::abs(ma - mb) / se : (ma == mb ? 0.0 : INFINITY);
        rep.max_standardized = std::max(rep.max_standardized, d.standardized);
        rep.moments.push_back(d);
    }
    return rep;
}

double skew_hit_fraction(const Params& params, const SimConfig& cfg, double level) {
    validate(cfg);
    const std::int64_t units = to_units(level, cfg.step, "level");
    if (units < 1) throw std::invalid_argument("skew_hit_fraction: level must be >= step");

    SpiderWalker w(params, cfg.step);
    std::uint64_t negative = 0, completed = 0;
    for (std::uint64_t i = 0; i < cfg.num_paths; ++i) {
        w.reset_to(State(0.0, level, 0.0));
        Xoshiro256pp rng(cfg.seed, i);
        bool ok = true;
        while (w.radius_units() < units) {
            if (w.steps() >= cfg.max_steps) {
                ok = false;
                break;
            }
            w.step(rng.next());
        }
        if (!ok) continue;
        ++completed;
        if (!w.on_longest()) ++negative;
    }
    if (completed == 0) throw SimulationCapError("skew_hit_fraction: every path hit the step cap");
    return static_cast<double>(negative) / static_cast<double>(completed);
}

} // namespace spider

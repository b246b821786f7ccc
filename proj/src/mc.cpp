#include "bdg/mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "bdg/rng.hpp"

namespace bdg::mc {

void PathConfig::validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("PathConfig: dt must be > 0");
    if (!(horizon > 0.0) || dt > horizon / 100.0)
        throw std::invalid_argument("PathConfig: need dt <= horizon/100");
    if (n_paths <= 0) throw std::invalid_argument("PathConfig: n_paths must be > 0");
    if (!(coarsen_after > 0.0) || !(coarsen_rate > 0.0))
        throw std::invalid_argument("PathConfig: coarsening parameters must be > 0");
}

void StoppingSpec::validate() const {
    if (!(param > 0.0)) throw std::invalid_argument("StoppingSpec: param must be > 0");
    if (!(cap > 0.0)) throw std::invalid_argument("StoppingSpec: cap must be > 0");
    if (start_time < 0.0 || start_scale < 0.0 || start_time >= cap)
        throw std::invalid_argument("StoppingSpec: invalid regularized start");
}

StoppingSpec StoppingSpec::fixed_time(double horizon) {
    return {Kind::FixedTime, horizon, horizon, 0.0};
}
StoppingSpec StoppingSpec::region_hit(double threshold, double cap) {
    return {Kind::RegionHit, threshold, cap, 0.0};
}
StoppingSpec StoppingSpec::region_hit_on_boundary(double threshold, double cap) {
    return {Kind::RegionHitOnBoundary, threshold, cap, 0.0};
}
StoppingSpec StoppingSpec::corridor_exit(double h, double cap) {
    return {Kind::CorridorExit, h, cap, 0.0};
}

namespace {

struct PathResult {
    double tau = 0.0;
    double bstar = 0.0;
    double hedge_integral = 0.0;
    bool capped = false;
};

// One Euler path with per-step bridge corrections. The running max is
// refreshed from the within-step bridge maximum of |B| whenever the step
// could plausibly set a record; corridor crossings use the bridge
// barrier-crossing probability. RNG draws for the bridge are consumed only
// when the test fires, which keeps the common case to one Gaussian per step.
PathResult run_path(const PathConfig& cfg, const StoppingSpec& stop,
                    bool need_hedge, const Payoff& payoff, rng::Stream& rng) {
    const double cap = std::min(stop.cap, cfg.horizon);
    const double barrier_up = stop.param;          // CorridorExit frame
    const double barrier_dn = -(2.0 + stop.param);
    const bool corridor = stop.kind == StoppingSpec::Kind::CorridorExit;
    const bool fixed = stop.kind == StoppingSpec::Kind::FixedTime;
    const double t_end = fixed ? std::min(stop.param, cap) : cap;

    double s = stop.start_time, b = 0.0, bs = stop.start_scale;
    PathResult out;
    for (;;) {
        double dt = cfg.dt;
        if (s >= cfg.coarsen_after)
            dt = std::max(cfg.dt, cfg.coarsen_rate * s);
        bool last = false;
        if (s + dt >= t_end - 1e-12 * t_end) {
            dt = t_end - s;
            last = true;
        }

        const double z = rng.gaussian();
        const double bn = b + z * std::sqrt(dt);
        if (need_hedge)
            out.hedge_integral += (*payoff.hedge)(s, b, bs) * (bn - b);

        if (corridor) {
            bool crossed = bn >= barrier_up || bn <= barrier_dn;
            if (!crossed && cfg.bridge_max) {
                const double sd = 6.0 * std::sqrt(dt);
                if (barrier_up - std::max(b, bn) < sd &&
                    rng.uniform() < std::exp(-2.0 * (barrier_up - b) *
                                             (barrier_up - bn) / dt))
                    crossed = true;
                else if (std::min(b, bn) - barrier_dn < sd &&
                         rng.uniform() < std::exp(-2.0 * (b - barrier_dn) *
                                                  (bn - barrier_dn) / dt))
                    crossed = true;
            }
            if (crossed) {
                out.tau = s + dt;
                out.bstar = std::max(bs, std::fabs(bn));
                return out;
            }
            bs = std::max(bs, std::fabs(bn));
            b = bn;
            s += dt;
            if (last) {
                out.tau = t_end;
                out.bstar = bs;
                out.capped = true;
                return out;
            }
            continue;
        }

        const double amax0 = std::max(std::fabs(b), std::fabs(bn));
        double amax = amax0;
        if (cfg.bridge_max && bs - amax0 < 6.0 * std::sqrt(dt)) {
            const double d = bn - b;
            const double mx = 0.5 * (b + bn +
                std::sqrt(d * d - 2.0 * dt * std::log(rng.uniform())));
            const double mn = 0.5 * (b + bn -
                std::sqrt(d * d - 2.0 * dt * std::log(rng.uniform())));
            amax = std::max(mx, -mn);
        }
        const bool record = amax > bs;
        bs = std::max(bs, amax);
        b = bn;
        s += dt;

        if (stop.kind == StoppingSpec::Kind::RegionHit ||
            stop.kind == StoppingSpec::Kind::RegionHitOnBoundary) {
            const bool armed = s >= std::max(stop.clock_start, cfg.dt) && bs > 0.0;
            const bool in_region = armed && s >= stop.param * bs * bs;
            const bool hit = stop.kind == StoppingSpec::Kind::RegionHit
                                 ? in_region
                                 : (in_region && record);
            if (hit) {
                out.tau = s;
                out.bstar = bs;
                return out;
            }
        }
        if (last) {
            out.tau = t_end;
            out.bstar = bs;
            out.capped = !fixed;
            return out;
        }
    }
}

// Runs per_path(chunk_state, path_index) over fixed-size chunks, workers
// pulling chunks from a shared counter. The chunk layout does not depend on
// the thread count, so reducing the returned vector in index order gives
// bit-identical results for any parallelism level.
template <class Accum, class Fn>
std::vector<Accum> run_chunks(long n_paths, int n_threads, Fn&& per_path) {
    constexpr long kChunk = 4096;
    const long n_chunks = (n_paths + kChunk - 1) / kChunk;
    std::vector<Accum> acc(static_cast<std::size_t>(n_chunks));
    std::atomic<long> next{0};
    auto work = [&] {
        for (;;) {
            const long c = next.fetch_add(1, std::memory_order_relaxed);
            if (c >= n_chunks) return;
            const long begin = c * kChunk;
            const long end = std::min(n_paths, begin + kChunk);
            for (long i = begin; i < end; ++i)
                per_path(acc[static_cast<std::size_t>(c)], i);
        }
    };
    int threads = n_threads > 0
                      ? n_threads
                      : static_cast<int>(std::thread::hardware_concurrency());
    threads = static_cast<int>(std::max<long>(1, std::min<long>(threads, n_chunks)));
    if (threads == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    return acc;
}

double payoff_value(const Payoff& payoff, const PathResult& r) {
    switch (payoff.kind) {
        case PayoffKind::SqrtTau: return std::sqrt(r.tau);
        case PayoffKind::BStar: return r.bstar;
        case PayoffKind::SqrtTauMinusCBStar:
            return std::sqrt(r.tau) - payoff.C * r.bstar;
        case PayoffKind::HedgeGap:
            return r.hedge_integral - (std::sqrt(r.tau) - payoff.C * r.bstar);
    }
    return 0.0;
}

}  // namespace

MCEstimate simulate(const PathConfig& config, const StoppingSpec& stop,
                    const Payoff& payoff) {
    config.validate();
    stop.validate();
    const bool need_hedge = payoff.kind == PayoffKind::HedgeGap;
    if (need_hedge && payoff.hedge == nullptr)
        throw std::invalid_argument("simulate: HedgeGap payoff needs a hedge table");

    struct Accum {
        double sum = 0.0, sumsq = 0.0;
        long capped = 0;
    };
    auto chunks = run_chunks<Accum>(
        config.n_paths, config.n_threads, [&](Accum& a, long i) {
            rng::Stream rng(config.seed, static_cast<std::uint64_t>(i));
            const PathResult r = run_path(config, stop, need_hedge, payoff, rng);
            const double x = payoff_value(payoff, r);
            a.sum += x;
            a.sumsq += x * x;
            if (r.capped) ++a.capped;
        });
    double sum = 0.0, sumsq = 0.0;
    long capped = 0;
    for (const Accum& a : chunks) {
        sum += a.sum;
        sumsq += a.sumsq;
        capped += a.capped;
    }
    MCEstimate est;
    est.n_effective = config.n_paths;
    est.mean = sum / config.n_paths;
    const double var =
        std::max(0.0, (sumsq - sum * est.mean) / std::max<long>(config.n_paths - 1, 1));
    est.std_error = std::sqrt(var / config.n_paths);
    est.tail_fraction = static_cast<double>(capped) / config.n_paths;
    return est;
}

RatioEstimate bdg_ratio(const PathConfig& config, const StoppingSpec& stop) {
    config.validate();
    stop.validate();
    const Payoff none = Payoff::sqrt_tau();
    struct Accum {
        double ss = 0.0, ss2 = 0.0, sb = 0.0, sb2 = 0.0, ssb = 0.0;
        long capped = 0;
    };
    auto chunks = run_chunks<Accum>(
        config.n_paths, config.n_threads, [&](Accum& a, long i) {
            rng::Stream rng(config.seed, static_cast<std::uint64_t>(i));
            const PathResult r = run_path(config, stop, false, none, rng);
            const double x = std::sqrt(r.tau);
            const double y = r.bstar;
            a.ss += x;
            a.ss2 += x * x;
            a.sb += y;
            a.sb2 += y * y;
            a.ssb += x * y;
            if (r.capped) ++a.capped;
        });
    double ss = 0.0, ss2 = 0.0, sb = 0.0, sb2 = 0.0, ssb = 0.0;
    long capped = 0;
    for (const Accum& a : chunks) {
        ss += a.ss;
        ss2 += a.ss2;
        sb += a.sb;
        sb2 += a.sb2;
        ssb += a.ssb;
        capped += a.capped;
    }
    const double n = static_cast<double>(config.n_paths);
    const double mx = ss / n, my = sb / n;
    const double vx = std::max(0.0, (ss2 - n * mx * mx) / (n - 1));
    const double vy = std::max(0.0, (sb2 - n * my * my) / (n - 1));
    const double cxy = (ssb - n * mx * my) / (n - 1);

    RatioEstimate est;
    est.ratio = mx / my;
    est.std_error = std::fabs(est.ratio) *
                    std::sqrt(std::max(0.0, vx / (mx * mx) + vy / (my * my) -
                                                2.0 * cxy / (mx * my)) /
                              n);
    est.sqrt_tau = {mx, std::sqrt(vx / n), config.n_paths, capped / n};
    est.bstar = {my, std::sqrt(vy / n), config.n_paths, capped / n};
    return est;
}

std::vector<DichotomyRow> moment_dichotomy(double threshold,
                                           const PathConfig& config,
                                           const std::vector<double>& caps) {
    config.validate();
    if (caps.empty()) throw std::invalid_argument("moment_dichotomy: empty cap grid");
    if (!std::is_sorted(caps.begin(), caps.end()))
        throw std::invalid_argument("moment_dichotomy: caps must be increasing");

    PathConfig cfg = config;
    cfg.horizon = std::max(cfg.horizon, caps.back());
    // rho is heavy-tailed; without coarsening a 1e4 cap costs 1e8 steps/path
    if (!std::isfinite(cfg.coarsen_after)) cfg.coarsen_after = 1.0;
    StoppingSpec stop = StoppingSpec::region_hit(threshold, caps.back());
    stop.clock_start = 1.0;  // the region clock starts at s = 1

    std::vector<DichotomyRow> rows(caps.size());
    for (std::size_t k = 0; k < caps.size(); ++k) rows[k].cap = caps[k];

    const Payoff none = Payoff::sqrt_tau();
    struct Accum {
        std::vector<double> sum, sumsq;
        std::vector<long> hits;
    };
    auto chunks = run_chunks<Accum>(
        cfg.n_paths, cfg.n_threads, [&](Accum& a, long i) {
            if (a.sum.empty()) {
                a.sum.assign(caps.size(), 0.0);
                a.sumsq.assign(caps.size(), 0.0);
                a.hits.assign(caps.size(), 0);
            }
            rng::Stream rng(cfg.seed, static_cast<std::uint64_t>(i));
            const PathResult r = run_path(cfg, stop, false, none, rng);
            for (std::size_t k = 0; k < caps.size(); ++k) {
                const double x = std::sqrt(std::min(r.tau, caps[k]));
                a.sum[k] += x;
                a.sumsq[k] += x * x;
                if (!r.capped && r.tau <= caps[k]) ++a.hits[k];
            }
        });
    std::vector<double> sum(caps.size(), 0.0), sumsq(caps.size(), 0.0);
    std::vector<long> hits(caps.size(), 0);
    for (const Accum& a : chunks) {
        if (a.sum.empty()) continue;
        for (std::size_t k = 0; k < caps.size(); ++k) {
            sum[k] += a.sum[k];
            sumsq[k] += a.sumsq[k];
            hits[k] += a.hits[k];
        }
    }
    const double n = static_cast<double>(cfg.n_paths);
    for (std::size_t k = 0; k < caps.size(); ++k) {
        rows[k].mean = sum[k] / n;
        const double var =
            std::max(0.0, (sumsq[k] - n * rows[k].mean * rows[k].mean) / (n - 1));
        rows[k].std_error = std::sqrt(var / n);
        rows[k].hit_fraction = hits[k] / n;
    }
    return rows;
}

HedgingResult hedging_check(const extension::HedgeTable& hedge, double C,
                            const PathConfig& config, const StoppingSpec& stop,
                            double slack) {
    config.validate();
    stop.validate();
    const Payoff payoff = Payoff::hedge_gap(hedge, C);

    std::vector<double> gaps(static_cast<std::size_t>(config.n_paths));
    struct Accum {
        double sum = 0.0, sumsq = 0.0;
        long ok = 0;
    };
    auto chunks = run_chunks<Accum>(
        config.n_paths, config.n_threads, [&](Accum& a, long i) {
            rng::Stream rng(config.seed, static_cast<std::uint64_t>(i));
            const PathResult r = run_path(config, stop, true, payoff, rng);
            const double gap = payoff_value(payoff, r);
            gaps[static_cast<std::size_t>(i)] = gap;
            a.sum += gap;
            a.sumsq += gap * gap;
            if (gap >= -slack) ++a.ok;
        });
    double sum = 0.0, sumsq = 0.0;
    long ok = 0;
    for (const Accum& a : chunks) {
        sum += a.sum;
        sumsq += a.sumsq;
        ok += a.ok;
    }
    const double n = static_cast<double>(config.n_paths);
    HedgingResult res;
    res.n_paths = config.n_paths;
    res.satisfied_fraction = ok / n;
    res.mean_gap = sum / n;
    const double var = std::max(0.0, (sumsq - n * res.mean_gap * res.mean_gap) / (n - 1));
    res.gap_std_error = std::sqrt(var / n);

    const std::size_t q = static_cast<std::size_t>(0.01 * gaps.size());
    std::nth_element(gaps.begin(), gaps.begin() + q, gaps.end());
    res.slack_for_99 = std::max(0.0, -gaps[q]);
    return res;
}

}  // namespace bdg::mc

#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "bdg/extension.hpp"

namespace bdg::mc {

struct PathConfig {
    double dt = 1e-4;
    double horizon = 50.0;  // global safety cap on every rule
    long n_paths = 100000;
    std::uint64_t seed = 1;
    /// Sample the within-step maximum from the Brownian bridge whenever a step
    /// could plausibly set a new record; without it the running max is biased
    /// low by O(sqrt(dt)).
    bool bridge_max = true;
    /// After this much elapsed time the step grows geometrically (rate per
    /// unit time); 0 keeps the step fixed. Used for heavy-tailed stopping
    /// times where caps reach 1e4.
    double coarsen_after = std::numeric_limits<double>::infinity();
    double coarsen_rate = 1e-3;
    /// 0 = one chunk per hardware thread. Estimates are identical regardless
    /// of the thread count: path i's stream depends only on (seed, i) and
    /// chunks are reduced in index order.
    int n_threads = 1;

    void validate() const;
};

struct StoppingSpec {
    enum class Kind { FixedTime, RegionHit, RegionHitOnBoundary, CorridorExit };
    Kind kind = Kind::FixedTime;
    /// FixedTime: the horizon. RegionHit / RegionHitOnBoundary: the threshold
    /// on s / B*(s)^2. CorridorExit: the overshoot h of the corridor
    /// [-h, 2 + h] around a start at 0.
    double param = 1.0;
    double cap = std::numeric_limits<double>::infinity();
    /// The region clock: the region condition is only tested for s >= clock_start.
    double clock_start = 0.0;
    /// Regularized start (t+, 0, eps): the elapsed clock begins at start_time
    /// and B* is floored at start_scale. Both default to 0, the raw origin.
    /// Starting strictly inside the continuation region keeps the region
    /// rules from collapsing onto the scale-invariant atom at s = 0.
    double start_time = 0.0;
    double start_scale = 0.0;

    static StoppingSpec fixed_time(double horizon);
    static StoppingSpec region_hit(double threshold, double cap);
    static StoppingSpec region_hit_on_boundary(double threshold, double cap);
    static StoppingSpec corridor_exit(double h, double cap);

    void validate() const;
};

enum class PayoffKind { SqrtTau, BStar, SqrtTauMinusCBStar, HedgeGap };

struct Payoff {
    PayoffKind kind = PayoffKind::SqrtTau;
    double C = 0.0;                                  // SqrtTauMinusCBStar, HedgeGap
    const extension::HedgeTable* hedge = nullptr;    // HedgeGap

    static Payoff sqrt_tau() { return {PayoffKind::SqrtTau, 0.0, nullptr}; }
    static Payoff bstar() { return {PayoffKind::BStar, 0.0, nullptr}; }
    static Payoff sqrt_tau_minus_c_bstar(double C) {
        return {PayoffKind::SqrtTauMinusCBStar, C, nullptr};
    }
    /// gap = integral of H dB - (sqrt(tau) - C B*(tau)); the hedging
    /// inequality says the gap is nonnegative.
    static Payoff hedge_gap(const extension::HedgeTable& h, double C) {
        return {PayoffKind::HedgeGap, C, &h};
    }
};

struct MCEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    long n_effective = 0;
    double tail_fraction = 0.0;  // paths stopped by the cap
};

MCEstimate simulate(const PathConfig& config, const StoppingSpec& stop,
                    const Payoff& payoff);

struct RatioEstimate {
    double ratio = 0.0;
    double std_error = 0.0;  // delta method
    MCEstimate sqrt_tau;
    MCEstimate bstar;
};

/// E[sqrt(tau)] / E[B*(tau)] for one stopping rule, with both payoffs read off
/// the same paths so the ratio error uses the joint covariance.
RatioEstimate bdg_ratio(const PathConfig& config, const StoppingSpec& stop);

struct DichotomyRow {
    double cap = 0.0;
    double mean = 0.0;       // E[sqrt(min(rho, cap))]
    double std_error = 0.0;
    double hit_fraction = 0.0;  // rho <= cap
};

/// Capped sqrt-moment profile of rho = first s >= 1 with s / B*(s)^2 >=
/// threshold, across an increasing cap grid (one path ensemble, all caps).
std::vector<DichotomyRow> moment_dichotomy(double threshold,
                                           const PathConfig& config,
                                           const std::vector<double>& caps);

struct HedgingResult {
    double satisfied_fraction = 0.0;  // gap >= -slack
    double mean_gap = 0.0;
    double gap_std_error = 0.0;
    /// Smallest slack at which 99% of the observed paths satisfy the
    /// inequality (1st percentile of the violation).
    double slack_for_99 = 0.0;
    long n_paths = 0;
};

HedgingResult hedging_check(const extension::HedgeTable& hedge, double C,
                            const PathConfig& config, const StoppingSpec& stop,
                            double slack);

}  // namespace bdg::mc

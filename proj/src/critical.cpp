#include "bdg/critical.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace bdg::critical {

namespace {

bool is_plus(oide::Regime r) { return r == oide::Regime::PlusInfinity; }

}  // namespace

oide::Regime classify(double C, double t0, double p, const SearchConfig& cfg) {
    oide::SolverParams params = cfg.solver;
    params.C = C;
    params.t0 = t0;
    params.p = p;
    try {
        oide::Regime r = oide::solve(params, cfg.thresholds).regime;
        if (r != oide::Regime::Inconclusive) return r;
        // retry once with a lower floor before giving up
        params.t_min *= 0.1;
        return oide::solve(params, cfg.thresholds).regime;
    } catch (const oide::StepUnderflowError&) {
        return oide::Regime::Inconclusive;
    }
}

namespace {

std::vector<double> scan_grid(std::pair<double, double> range, int n) {
    std::vector<double> ts(n);
    for (int i = 0; i < n; ++i)
        ts[i] = range.first + (range.second - range.first) * i / (n - 1);
    return ts;
}

// Bisect between a MinusInfinity point and a PlusInfinity point; returns the
// final (outside, inside) bracket.
std::pair<double, double> bisect_edge(double C, double p, double outside,
                                      double inside, double tol,
                                      const SearchConfig& cfg) {
    while (std::fabs(inside - outside) > tol) {
        const double mid = 0.5 * (inside + outside);
        if (mid == inside || mid == outside) break;
        if (is_plus(classify(C, mid, p, cfg)))
            inside = mid;
        else
            outside = mid;
    }
    return {outside, inside};
}

// Existence-only probe, scanning outward from a hint to cut the common case
// to a couple of solves.
bool interval_exists(double C, double p, const SearchConfig& cfg, double hint,
                     double* witness) {
    std::vector<double> ts = scan_grid(cfg.t0_range, cfg.scan_points);
    std::sort(ts.begin(), ts.end(), [hint](double a, double b) {
        return std::fabs(a - hint) < std::fabs(b - hint);
    });
    for (double t0 : ts) {
        if (is_plus(classify(C, t0, p, cfg))) {
            if (witness) *witness = t0;
            return true;
        }
    }
    return false;
}

}  // namespace

std::optional<RegimeInterval> find_regime_interval(double C, double p,
                                                   std::pair<double, double> range,
                                                   const SearchConfig& cfg) {
    const std::vector<double> ts = scan_grid(range, cfg.scan_points);
    std::vector<bool> plus(ts.size());
    int first = -1, last = -1;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        plus[i] = is_plus(classify(C, ts[i], p, cfg));
        if (plus[i]) {
            if (first < 0) first = static_cast<int>(i);
            last = static_cast<int>(i);
        }
    }
    if (first < 0) return std::nullopt;

    RegimeInterval iv;
    iv.C = C;
    iv.p = p;
    if (first == 0) {
        iv.t1 = ts.front();
    } else {
        auto [lo, hi] = bisect_edge(C, p, ts[first - 1], ts[first], cfg.tol_t0, cfg);
        iv.t1 = 0.5 * (lo + hi);
    }
    if (last == static_cast<int>(ts.size()) - 1) {
        iv.t2 = ts.back();
    } else {
        auto [lo, hi] = bisect_edge(C, p, ts[last + 1], ts[last], cfg.tol_t0, cfg);
        iv.t2 = 0.5 * (lo + hi);
    }
    return iv;
}

CriticalResult find_critical(double p, const SearchConfig& cfg) {
    double c_lo = cfg.c_range.first;
    double c_hi = cfg.c_range.second;
    double witness = 0.5 * (cfg.t0_range.first + cfg.t0_range.second);

    if (!interval_exists(c_hi, p, cfg, witness, &witness))
        throw BracketFailure("find_critical: no PlusInfinity interval at upper C");
    if (interval_exists(c_lo, p, cfg, witness, nullptr))
        throw BracketFailure("find_critical: PlusInfinity interval already at lower C");

    while (c_hi - c_lo > cfg.tol_c) {
        const double mid = 0.5 * (c_lo + c_hi);
        if (interval_exists(mid, p, cfg, witness, &witness))
            c_hi = mid;
        else
            c_lo = mid;
    }

    auto iv = find_regime_interval(c_hi, p, cfg.t0_range, cfg);
    if (!iv)
        throw BracketFailure("find_critical: witness interval vanished at c_hi");

    CriticalResult res;
    res.c_hat = c_hi;
    res.c_bracket = {c_lo, c_hi};
    res.t0_hat = 0.5 * (iv->t1 + iv->t2);
    res.t0_bracket = {iv->t1, iv->t2};
    res.p = p;
    res.tol_c = cfg.tol_c;
    res.tol_t0 = cfg.tol_t0;
    return res;
}

oide::SolutionGrid bounded_solution(double C, Edge which, double p,
                                    const SearchConfig& cfg, double edge_tol) {
    auto iv = find_regime_interval(C, p, cfg.t0_range, cfg);
    if (!iv)
        throw BracketFailure("bounded_solution: C appears subcritical");

    // Re-establish a strict (outside, inside) bracket around the chosen edge
    // and drive it far below tol_t0.
    const double inward = 0.25 * (iv->t2 - iv->t1);
    double inside, outside;
    if (which == Edge::Lower) {
        inside = std::min(iv->t1 + inward, 0.5 * (iv->t1 + iv->t2));
        outside = iv->t1 - std::max(2.0 * cfg.tol_t0, 1e-6);
    } else {
        inside = std::max(iv->t2 - inward, 0.5 * (iv->t1 + iv->t2));
        outside = iv->t2 + std::max(2.0 * cfg.tol_t0, 1e-6);
    }
    if (!is_plus(classify(C, inside, p, cfg)))
        inside = 0.5 * (iv->t1 + iv->t2);
    auto [lo, hi] = bisect_edge(C, p, outside, inside, edge_tol, cfg);

    oide::SolverParams params = cfg.solver;
    params.C = C;
    params.p = p;
    params.t0 = 0.5 * (lo + hi);
    return oide::solve(params, cfg.thresholds);
}

}  // namespace bdg::critical

#pragma once

#include <optional>
#include <utility>

#include "bdg/oide.hpp"

namespace bdg::critical {

struct SearchConfig {
    std::pair<double, double> c_range{1.0, 1.6};
    std::pair<double, double> t0_range{0.3, 2.0};
    double tol_c = 1e-3;
    double tol_t0 = 1e-3;
    int scan_points = 64;
    oide::SolverParams solver;        // C and t0 are overwritten per probe
    oide::RegimeThresholds thresholds;
};

/// The sub-interval (t1, t2) of pasting points whose backward solutions
/// diverge to +infinity, for a fixed supercritical C.
struct RegimeInterval {
    double C = 0.0;
    double t1 = 0.0;
    double t2 = 0.0;
    double p = 1.0;
};

struct CriticalResult {
    double c_hat = 0.0;
    double t0_hat = 0.0;
    std::pair<double, double> c_bracket{0.0, 0.0};
    std::pair<double, double> t0_bracket{0.0, 0.0};
    double p = 1.0;
    double tol_c = 0.0;
    double tol_t0 = 0.0;
};

class BracketFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Classify the t0-scan for fixed C; Inconclusive and step-underflow results
/// count as MinusInfinity (conservative toward not overstating the bracket).
oide::Regime classify(double C, double t0, double p, const SearchConfig& cfg);

/// Scan t0 over the range, then bisect both edges of the PlusInfinity
/// sub-interval; nullopt when no scan point classifies as PlusInfinity.
std::optional<RegimeInterval> find_regime_interval(double C, double p,
                                                   std::pair<double, double> range,
                                                   const SearchConfig& cfg);

/// Nested bisection on C with predicate "a PlusInfinity interval exists";
/// the critical point is approached from above so the last witness interval
/// provides t0_hat.
CriticalResult find_critical(double p, const SearchConfig& cfg);

enum class Edge { Lower, Upper };

/// Near-bounded solve at the t1 (lower) or t2 (upper) edge, with the edge
/// bracket bisected far below tol_t0 so the returned grid hugs the bounded
/// solution down to the floor.
oide::SolutionGrid bounded_solution(double C, Edge which, double p,
                                    const SearchConfig& cfg,
                                    double edge_tol = 1e-12);

}  // namespace bdg::critical

#pragma once

#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "bdg/densities.hpp"
#include "bdg/quadrature.hpp"

namespace bdg::oide {

/// Step-size policy for the backward integration.
struct StepPolicy {
    double initial_step = 1e-3;
    double min_step = 1e-13;
    double max_step = 0.02;
    double tol = 1e-8;          // per-step error tolerance
    double t_fraction = 0.05;   // step <= t_fraction * t (the 1/(2t) factor stiffens near 0)
};

struct SolverParams {
    double C = 1.0;
    double t0 = 1.0;
    double p = 1.0;
    double t_min = 1e-5;
    StepPolicy grid;
    densities::SeriesParams series;
    quadrature::QuadSpec quad{1e-8, 1e-10, 400, -0.5};

    void validate() const;
};

enum class Regime { Bounded, PlusInfinity, MinusInfinity, Inconclusive };

const char* regime_name(Regime r);

/// Divergence detectors for the backward solution relative to the floor
/// t^{p/2} - C.
struct RegimeThresholds {
    double blowup_hi = 5.0;
    double crossing_margin = 0.0;
};

class StepUnderflowError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Backward-computed solution values on [t_min, t0] plus the analytic branch
/// t^{p/2} - C for t >= t0. Node derivatives are stored so evaluation between
/// nodes is cubic Hermite.
struct SolutionGrid {
    SolverParams params;
    std::vector<double> ts;   // strictly decreasing, ts[0] = t0
    std::vector<double> us;
    std::vector<double> dus;  // U'(t_i); dus[0] is the left limit at t0
    Regime regime = Regime::Inconclusive;
    double u_at_floor = 0.0;
    double left_derivative_at_t0 = 0.0;

    double analytic_value(double t) const;  // t^{p/2} - C
    double floor_value(double t) const { return analytic_value(t); }

    /// U(t): analytic branch for t >= t0, Hermite interpolation on the grid,
    /// linear continuation below the last computed node.
    double value(double t) const;
};

/// Right-hand side of the backward equation,
///   U'(t) = (p U(t) + I(t)) / (2t),   I(t) = int_0^inf [U(t+s) - U(t)] g(s) ds.
double rhs(double t, const SolutionGrid& grid);

/// The integral term I(t) alone (also the negative boundary b-derivative).
double integral_term(double t, const SolutionGrid& grid);

SolutionGrid solve(const SolverParams& params, const RegimeThresholds& thresholds = {});

/// Left derivative at t0 minus the analytic slope (p/2) t0^{p/2-1}; a nonzero
/// value certifies non-smooth pasting.
double pasting_gap(const SolutionGrid& grid);

/// CSV columns: t,U,analytic_floor
void write_csv(const SolutionGrid& grid, std::ostream& os);

}  // namespace bdg::oide

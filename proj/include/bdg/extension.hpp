#pragma once

#include <vector>

#include "bdg/oide.hpp"

namespace bdg::extension {

/// Full value surface U(t, b, b*) built from a bounded one-dimensional
/// solution by convolution with the exit density f^{1-|b|} and Brownian
/// scaling U(a^2 t, a b, a b*) = a^p U(t, b, b*).
struct ExtendedValue {
    oide::SolutionGrid base;
    densities::SeriesParams series;
    quadrature::QuadSpec quad{1e-9, 1e-11, 400, 0.0};

    /// Smallest t at which the backward solution is still trusted. Below it
    /// the grid is dominated by the unstable mode of the backward problem, so
    /// eval freezes U at U(t_trust) instead of reading the grid.
    double t_trust = 0.0;

    /// Builds the surface from a near-critical solve and sets t_trust to the
    /// last node before the departure from the floor exceeds max_departure.
    static ExtendedValue from_solution(oide::SolutionGrid grid,
                                       densities::SeriesParams series = {},
                                       double max_departure = 1.0);

    /// Requires |b| <= bstar, t >= 0. The state (0,0,0) evaluates to 0.
    double eval(double t, double b, double bstar) const;

    double C() const { return base.params.C; }
    double t0() const { return base.params.t0; }
    double p() const { return base.params.p; }
};

/// (db, dbstar) at the diagonal point (t,1,1): db is the inward b-derivative,
/// dbstar is 0 before the pasting point and -db - C after it. t = t0 is
/// rejected (the one-sided limits differ).
std::pair<double, double> boundary_derivatives(const ExtendedValue& ev, double t);

struct HedgeEvaluator {
    const ExtendedValue* value = nullptr;
    double fd_step = 1e-4;
};

/// Finite-difference estimate of V_b; one-sided stencil within fd_step of the
/// boundary |b| = bstar so the stencil never straddles the kink.
double hedge_integrand(const HedgeEvaluator& he, double t, double b, double bstar);

struct ConcavityTriple {
    double t = 0, b = 0, bstar = 0;
    double alpha = 0, beta = 0;
    double margin = 0;  // p U(d_alpha) + q U(d_beta) - U(d)
};

struct ConcavityLattice {
    std::vector<double> t_scaled;   // t / bstar^2
    std::vector<double> b_scaled;   // b / bstar
    std::vector<double> alphas;
    std::vector<double> betas;

    static ConcavityLattice default_near_kink(double t0_hat);
};

/// Returns the lattice triple maximizing the mid-concavity margin; a positive
/// margin certifies the two-point concavity violation.
ConcavityTriple concavity_search(const ExtendedValue& ev, const ConcavityLattice& lattice);

double concavity_margin(const ExtendedValue& ev, double t, double b, double bstar,
                        double alpha, double beta);

/// Precomputed table of the hedging integrand in the self-similar coordinates
/// (t/bstar^2, b/bstar); by scaling H(t,b,bstar) = bstar^{p-1} Hb(t', b').
class HedgeTable {
public:
    HedgeTable() = default;
    HedgeTable(const ExtendedValue& ev, double t_scaled_max = 50.0,
               int n_t_fine = 400, int n_t_coarse = 200, int n_b = 101);

    double operator()(double t, double b, double bstar) const;

private:
    double lookup(double ts, double bs) const;  // bs in [0,1]
    double t_split_ = 2.0, t_max_ = 50.0;
    double p_ = 1.0;
    int nb_ = 0;
    std::vector<double> t_nodes_;
    std::vector<std::vector<double>> hb_;  // [it][ib]
};

}  // namespace bdg::extension

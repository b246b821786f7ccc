#pragma once

#include <stdexcept>

#include "bdg/quadrature.hpp"

namespace bdg::densities {

/// Truncation settings for the two series representations of the exit-time
/// density f^h and its boundary derivative g.
///
/// Both functions have a Gaussian-type series converging fast for small times
/// and a dual eigenfunction (spectral) series converging fast for large
/// times; evaluation switches at s_switch.
struct SeriesParams {
    int n_terms_small = 20;
    int n_terms_spectral = 60;
    double s_switch = 1.0;
    double abs_tol = 1e-12;

    void validate() const {
        if (n_terms_small < 1 || n_terms_spectral < 1)
            throw std::invalid_argument("SeriesParams: term counts must be >= 1");
        if (!(s_switch > 0.0) || !(abs_tol > 0.0))
            throw std::invalid_argument("SeriesParams: s_switch and abs_tol must be positive");
    }
};

/// Corridor-exit transform settings (exit of [-h, 2+h] from 0).
struct CorridorExit {
    double h = 0.3;
    std::vector<double> theta_grid = {0.0, 0.5, 1.0, 2.0, 5.0, 10.0};
};

/// Density of the first time |B| hits 1, for B started at 1-h. Small-time
/// branch is the bilateral Gaussian-image series; for s >= s_switch the dual
/// spectral series is used.
double eval_fh(double h, double s, const SeriesParams& params = {});

/// Boundary derivative g(s) = lim_{h->0} f^h(s)/h.
double eval_g(double s, const SeriesParams& params = {});

/// Spectral-branch evaluations regardless of s (used to certify branch
/// agreement and for analytic tail bounds).
double eval_fh_spectral(double h, double s, int n_terms);
double eval_fh_small_time(double h, double s, int n_terms);
double eval_g_spectral(double s, int n_terms);
double eval_g_small_time(double s, int n_terms);

/// Laplace transform of the corridor exit time sigma^h,
/// cosh(sqrt(2 theta)) / cosh((1+h) sqrt(2 theta)). Exact; returns 1 at 0.
double laplace_sigma(double theta, double h);

/// E[(sigma^h)^{1/2}] via adaptive quadrature of the two u-integrals obtained
/// from the Laplace transform by the substitution u = sqrt(2 theta).
double half_moment_sigma(double h, const quadrature::QuadSpec& spec = {});

/// Upper bound for the spectral tail of g beyond s (leading dropped term),
/// used to certify moment integrals truncated at finite s.
double g_tail_bound(double s, int n_terms);

}  // namespace bdg::densities

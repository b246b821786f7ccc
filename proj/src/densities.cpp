#include "bdg/densities.hpp"

#include <cmath>

namespace bdg::densities {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

inline void check_h(double h) {
    if (!(h > 0.0) || h > 1.0)
        throw std::domain_error("densities: h must lie in (0, 1]");
}

inline void check_s(double s) {
    if (!(s > 0.0)) throw std::domain_error("densities: s must be positive");
}
}  // namespace

double eval_fh_small_time(double h, double s, int n_terms) {
    // 1/sqrt(2 pi s^3) * sum_n [(4n+h) e^{-(4n+h)^2/2s} + (4n+2-h) e^{-(4n+2-h)^2/2s}]
    const double inv2s = 0.5 / s;
    double sum = 0.0;
    for (int n = -n_terms; n <= n_terms; ++n) {
        const double a = 4.0 * n + h;
        const double b = 4.0 * n + 2.0 - h;
        sum += a * std::exp(-a * a * inv2s) + b * std::exp(-b * b * inv2s);
    }
    return sum / std::sqrt(kTwoPi * s * s * s);
}

double eval_fh_spectral(double h, double s, int n_terms) {
    double sum = 0.0;
    for (int k = n_terms - 1; k >= 0; --k) {
        const double m = (2.0 * k + 1.0) * kPi * 0.5;
        sum += m * std::sin(m * h) * std::exp(-0.5 * m * m * s);
    }
    return sum;
}

double eval_g_small_time(double s, int n_terms) {
    double bracket = 1.0;
    double sign = -1.0;
    for (int n = 1; n <= n_terms; ++n) {
        const double q = (2.0 * n) * (2.0 * n);
        const double term = (1.0 - q / s) * std::exp(-0.5 * q / s);
        bracket += 2.0 * sign * term;
        sign = -sign;
        if (0.5 * q / s > 40.0) break;  // remaining terms below double precision
    }
    return bracket / std::sqrt(kTwoPi * s * s * s);
}

double eval_g_spectral(double s, int n_terms) {
    double sum = 0.0;
    for (int k = n_terms - 1; k >= 0; --k) {
        const double m = (2.0 * k + 1.0) * kPi * 0.5;
        sum += m * m * std::exp(-0.5 * m * m * s);
    }
    return sum;
}

double eval_fh(double h, double s, const SeriesParams& params) {
    check_h(h);
    check_s(s);
    return s < params.s_switch ? eval_fh_small_time(h, s, params.n_terms_small)
                               : eval_fh_spectral(h, s, params.n_terms_spectral);
}

double eval_g(double s, const SeriesParams& params) {
    check_s(s);
    return s < params.s_switch ? eval_g_small_time(s, params.n_terms_small)
                               : eval_g_spectral(s, params.n_terms_spectral);
}

double g_tail_bound(double s, int /*n_terms*/) {
    // All spectral terms of the tail integral are bounded by a geometric
    // series with ratio exp(-pi^2 s); the leading term dominates.
    const double m = kPi * 0.5;
    const double lead = m * m * std::exp(-0.5 * m * m * s);
    return 2.0 * lead / (0.5 * m * m);
}

double laplace_sigma(double theta, double h) {
    check_h(h);
    if (theta < 0.0) throw std::domain_error("laplace_sigma: theta must be >= 0");
    if (theta == 0.0) return 1.0;
    const double u = std::sqrt(2.0 * theta);
    const double v = (1.0 + h) * u;
    // cosh(u)/cosh(v) = e^{u-v} (1+e^{-2u}) / (1+e^{-2v}), overflow-safe.
    return std::exp(u - v) * (1.0 + std::exp(-2.0 * u)) / (1.0 + std::exp(-2.0 * v));
}

double half_moment_sigma(double h, const quadrature::QuadSpec& spec) {
    check_h(h);
    // sqrt(2/pi) [ int_0^inf sinh(hu) / (u cosh((1+h)u)^2) du
    //            + h int_0^inf cosh(u) tanh((1+h)u) / (u cosh((1+h)u)) du ]
    // Integrands rewritten in exponential form to avoid overflow. Both are
    // bounded at u = 0; the second decays only like e^{-hu}/u, so the
    // infinite-interval mapping carries the slow tail.
    auto f1 = [h](double u) {
        if (u < 1e-8) return h;  // sinh(hu)/(u cosh^2) -> h
        const double v = (1.0 + h) * u;
        const double e2v = std::exp(-2.0 * v);
        const double num = 2.0 * std::exp(h * u - 2.0 * v) * (1.0 - std::exp(-2.0 * h * u));
        const double den = (1.0 + e2v) * (1.0 + e2v);
        return num / (u * den);
    };
    auto f2 = [h](double u) {
        if (u < 1e-8) return 1.0 + h;  // cosh(u) tanh((1+h)u)/(u cosh((1+h)u)) -> 1+h
        const double v = (1.0 + h) * u;
        const double e2u = std::exp(-2.0 * u);
        const double e2v = std::exp(-2.0 * v);
        const double tanhv = (1.0 - e2v) / (1.0 + e2v);
        const double ratio = std::exp(u - v) * (1.0 + e2u) / (1.0 + e2v);
        return tanhv * ratio / u;
    };
    quadrature::QuadSpec qs = spec;
    const double inf = std::numeric_limits<double>::infinity();
    // Split at u = 1; the head is smooth, the tail is handled by the mapped rule.
    double total = quadrature::integrate(f1, 0.0, 1.0, qs).value +
                   quadrature::integrate(f1, 1.0, inf, qs).value;
    double second = quadrature::integrate(f2, 0.0, 1.0, qs).value +
                    quadrature::integrate(f2, 1.0, inf, qs).value;
    return std::sqrt(2.0 / kPi) * (total + h * second);
}

}  // namespace bdg::densities

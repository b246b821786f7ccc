#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "bdg/densities.hpp"

using namespace bdg;
using namespace bdg::densities;

namespace {
const quadrature::QuadSpec kMomentSpec{1e-10, 1e-12, 400, -0.5};
}

TEST_CASE("f^h is a probability density: unit mass") {
    for (double h : {0.1, 0.3, 0.5, 0.8, 0.95}) {
        auto mass = quadrature::integrate(
            [h](double s) { return eval_fh(h, s, {}); }, 0.0, 60.0, kMomentSpec);
        CHECK(std::fabs(mass.value - 1.0) < 1e-8);
    }
}

TEST_CASE("first moment of f^h equals h(2-h)") {
    for (double h : {0.1, 0.3, 0.5, 0.8, 0.95}) {
        auto mean = quadrature::integrate(
            [h](double s) { return s * eval_fh(h, s, {}); }, 0.0, 60.0, kMomentSpec);
        CHECK(std::fabs(mean.value - h * (2.0 - h)) < 1e-8);
    }
}

TEST_CASE("first moment of g equals 2") {
    auto mean = quadrature::integrate([](double s) { return s * eval_g(s, {}); },
                                      0.0, 80.0, kMomentSpec);
    CHECK(std::fabs(mean.value - 2.0) < 1e-6);
    CHECK(g_tail_bound(80.0, 60) * 80.0 < 1e-9);
}

TEST_CASE("small-time and spectral branches agree on the overlap") {
    for (double h : {0.2, 0.5, 0.9}) {
        for (double s = 0.2; s <= 5.0; s += 0.2) {
            const double a = eval_fh_small_time(h, s, 40);
            const double b = eval_fh_spectral(h, s, 200);
            CHECK(std::fabs(a - b) <= 1e-10 * std::max(1.0, std::fabs(b)));
        }
    }
    for (double s = 0.2; s <= 5.0; s += 0.2) {
        const double a = eval_g_small_time(s, 40);
        const double b = eval_g_spectral(s, 200);
        CHECK(std::fabs(a - b) <= 1e-10 * std::max(1.0, std::fabs(b)));
    }
}

TEST_CASE("branch switch at s_switch is seamless") {
    SeriesParams params;
    for (double h : {0.3, 0.7}) {
        const double below = eval_fh(h, params.s_switch * (1.0 - 1e-9), params);
        const double above = eval_fh(h, params.s_switch * (1.0 + 1e-9), params);
        CHECK(std::fabs(below - above) < 10.0 * params.abs_tol + 1e-8 * std::fabs(above));
    }
}

TEST_CASE("g is the h-derivative of f^h at h = 0") {
    const double h = 1e-7;
    for (double s : {0.3, 0.7, 1.5, 3.0}) {
        const double ratio = eval_fh(h, s, {}) / h;
        const double g = eval_g(s, {});
        CHECK(ratio == doctest::Approx(g).epsilon(1e-5));
    }
}

TEST_CASE("g positivity and square-root blow-up toward s = 0") {
    double prev = 0.0;
    for (double s : {1.0, 0.5, 0.25, 0.125, 0.0625}) {
        const double v = eval_g(s, {});
        CHECK(v > 0.0);
        CHECK(v > prev);  // grows monotonically along the halving sequence
        prev = v;
    }
    // g(s) ~ s^{-3/2}/sqrt(2 pi) near zero
    const double s = 1e-3;
    CHECK(eval_g(s, {}) ==
          doctest::Approx(1.0 / std::sqrt(2.0 * M_PI * s * s * s)).epsilon(1e-6));
}

TEST_CASE("domain errors") {
    CHECK_THROWS_AS(eval_fh(0.0, 1.0, {}), std::domain_error);
    CHECK_THROWS_AS(eval_fh(1.5, 1.0, {}), std::domain_error);
    CHECK_THROWS_AS(eval_fh(0.5, 0.0, {}), std::domain_error);
    CHECK_THROWS_AS(eval_g(-1.0, {}), std::domain_error);
    SeriesParams bad;
    bad.n_terms_small = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("corridor Laplace transform normalizes and matches the exit-time mean") {
    for (double h : {0.1, 0.3, 0.8}) {
        CHECK(laplace_sigma(0.0, h) == doctest::Approx(1.0));
        // -L'(0) = E[sigma^h] = h(2+h); second-order forward stencil since the
        // transform only exists for theta >= 0
        const double d = 1e-6;
        const double deriv = (3.0 * laplace_sigma(0.0, h) - 4.0 * laplace_sigma(d, h) +
                              laplace_sigma(2.0 * d, h)) /
                             (2.0 * d);
        CHECK(std::fabs(deriv - h * (2.0 + h)) < 1e-5);
    }
}

TEST_CASE("half moment of sigma^h: bounds and superlinearity in h") {
    for (double h : {0.1, 0.3, 0.8}) {
        const double m = half_moment_sigma(h);
        CHECK(m > 0.0);
        // Cauchy-Schwarz against E[sigma^h] = h(2+h)
        CHECK(m <= std::sqrt(h * (2.0 + h)) + 1e-12);
    }
    // E[sqrt(sigma^h)]/h increases as h decreases toward 0
    double prev = half_moment_sigma(0.1) / 0.1;
    for (double h : {0.01, 0.001}) {
        const double cur = half_moment_sigma(h) / h;
        CHECK(cur > prev);
        prev = cur;
    }
}

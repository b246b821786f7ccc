#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "bdg/quadrature.hpp"

using namespace bdg::quadrature;

TEST_CASE("smooth integrands against closed forms") {
    auto exp_res = integrate([](double x) { return std::exp(x); }, 0.0, 1.0, {});
    CHECK(exp_res.value == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-13));
    CHECK(std::fabs(exp_res.value - (std::exp(1.0) - 1.0)) <= exp_res.error + 1e-15);

    auto sin_res = integrate([](double x) { return std::sin(x); }, 0.0, M_PI, {});
    CHECK(sin_res.value == doctest::Approx(2.0).epsilon(1e-13));

    auto osc = integrate([](double x) { return std::cos(10.0 * x); }, 0.0, 2.0, {});
    CHECK(osc.value == doctest::Approx(std::sin(20.0) / 10.0).epsilon(1e-12));
}

TEST_CASE("endpoint singularity s^alpha handled by substitution") {
    QuadSpec spec;
    spec.singular_exponent = -0.5;
    auto r = integrate([](double s) { return 1.0 / std::sqrt(s); }, 0.0, 1.0, spec);
    CHECK(r.value == doctest::Approx(2.0).epsilon(1e-12));

    auto r2 = integrate([](double s) { return (1.0 - s) / std::sqrt(s); }, 0.0, 1.0, spec);
    CHECK(r2.value == doctest::Approx(2.0 - 2.0 / 3.0).epsilon(1e-12));

    // singularity at a shifted lower endpoint
    auto r3 = integrate([](double s) { return 1.0 / std::sqrt(s - 2.0); }, 2.0, 3.0, spec);
    CHECK(r3.value == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("infinite upper limit") {
    auto r = integrate([](double s) { return std::exp(-s); }, 0.0,
                       std::numeric_limits<double>::infinity(), {});
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-12));

    auto g = integrate([](double s) { return s * std::exp(-s * s); }, 0.0,
                       std::numeric_limits<double>::infinity(), {});
    CHECK(g.value == doctest::Approx(0.5).epsilon(1e-12));

    QuadSpec spec;
    spec.singular_exponent = -0.5;
    auto both = integrate([](double s) { return std::exp(-s) / std::sqrt(s); }, 0.0,
                          std::numeric_limits<double>::infinity(), spec);
    CHECK(both.value == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-11));
}

TEST_CASE("integral kernel of the pasting equation against a graded Riemann sum") {
    // integrand (sqrt(t+s) - sqrt(t)) * s^{-3/2} at t = 0.5 over (0, 1]
    const double t = 0.5;
    auto f = [t](double s) { return (std::sqrt(t + s) - std::sqrt(t)) / (s * std::sqrt(s)); };

    // oracle: midpoint rule on the graded mesh s = (k/n)^4, which resolves the
    // s^{-1/2} behaviour of the integrand near 0
    const int n = 200000;
    double oracle = 0.0;
    double prev = 0.0;
    for (int k = 1; k <= n; ++k) {
        const double u = static_cast<double>(k) / n;
        const double cur = u * u * u * u;
        oracle += f(0.5 * (prev + cur)) * (cur - prev);
        prev = cur;
    }

    QuadSpec spec;
    spec.singular_exponent = -0.5;
    auto r = integrate(f, 0.0, 1.0, spec);
    CHECK(r.value == doctest::Approx(oracle).epsilon(1e-7));
}

TEST_CASE("reported error bound is conservative") {
    struct Case {
        double exact;
        QuadResult res;
    };
    QuadSpec sing;
    sing.singular_exponent = -0.5;
    const Case cases[] = {
        {std::exp(1.0) - 1.0, integrate([](double x) { return std::exp(x); }, 0.0, 1.0, {})},
        {2.0, integrate([](double s) { return 1.0 / std::sqrt(s); }, 0.0, 1.0, sing)},
        {1.0, integrate([](double s) { return std::exp(-s); }, 0.0,
                        std::numeric_limits<double>::infinity(), {})},
        {std::log(101.0) / 10.0,
         integrate([](double x) { return 1.0 / (1.0 + 10.0 * x); }, 0.0, 10.0, {})},
    };
    for (const Case& c : cases) {
        CHECK(c.res.converged);
        CHECK(std::fabs(c.res.value - c.exact) <= c.res.error + 1e-14);
    }
}

TEST_CASE("tightening rel_tol does not move a converged result") {
    QuadSpec loose;
    loose.rel_tol = 1e-6;
    QuadSpec tight;
    tight.rel_tol = 1e-12;
    auto f = [](double x) { return std::exp(-x) * std::cos(3.0 * x); };
    auto a = integrate(f, 0.0, 5.0, loose);
    auto b = integrate(f, 0.0, 5.0, tight);
    CHECK(std::fabs(a.value - b.value) < 1e-6 * std::fabs(b.value) + 1e-12);
}

TEST_CASE("subdivision starvation raises QuadratureError with an estimate") {
    QuadSpec spec;
    spec.rel_tol = 1e-14;
    spec.abs_tol = 1e-16;
    spec.max_subdivisions = 2;
    bool threw = false;
    try {
        integrate([](double x) { return 1.0 / std::sqrt(std::fabs(x - 0.3) + 1e-8); },
                  0.0, 1.0, spec);
    } catch (const QuadratureError& e) {
        threw = true;
        CHECK(std::isfinite(e.estimate));
        CHECK(e.error_bound > 0.0);
    }
    CHECK(threw);

    auto soft = try_integrate(
        [](double x) { return 1.0 / std::sqrt(std::fabs(x - 0.3) + 1e-8); }, 0.0, 1.0,
        spec);
    CHECK_FALSE(soft.converged);
}

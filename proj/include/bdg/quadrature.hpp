#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bdg::quadrature {

/// Tolerances and knobs for the adaptive integrator.
///
/// singular_exponent describes a known power behaviour f(s) ~ (s-a)^alpha of
/// the integrand at the lower endpoint. Any alpha in (-1, 0] is accepted; the
/// integrable singularity is removed by the substitution s = a + v^2 before
/// the adaptive rule sees the integrand.
struct QuadSpec {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    int max_subdivisions = 400;
    double singular_exponent = 0.0;
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;   // estimated absolute error
    int subdivisions = 0;
    bool converged = false;
};

class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double estimate, double error_bound)
        : std::runtime_error(what), estimate(estimate), error_bound(error_bound) {}
    double estimate;
    double error_bound;
};

namespace detail {

// Gauss-Kronrod 7-15 pair on [-1,1].
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

template <typename F>
inline void gk15(const F& f, double a, double b, double& result, double& err) {
    const double c = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double fv[15];
    double resk = 0.0, resg = 0.0;
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const double f1 = f(c - dx);
        const double f2 = f(c + dx);
        fv[j] = f1;
        fv[14 - j] = f2;
        resk += kWgk[j] * (f1 + f2);
        if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
    }
    const double fc = f(c);
    fv[7] = fc;
    resk += kWgk[7] * fc;
    resg += kWg[3] * fc;
    resk *= half;
    resg *= half;
    // Scaled error estimate as in QUADPACK.
    double mean = resk / (b - a);
    double asc = 0.0;
    for (int j = 0; j < 7; ++j)
        asc += kWgk[j] * (std::fabs(fv[j] - mean) + std::fabs(fv[14 - j] - mean));
    asc += kWgk[7] * std::fabs(fv[7] - mean);
    asc *= std::fabs(half);
    err = std::fabs(resk - resg);
    if (asc > 0.0 && err > 0.0)
        err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
    result = resk;
}

struct Segment {
    double a, b, value, error;
};

template <typename F>
inline QuadResult adapt(const F& f, double a, double b, const QuadSpec& spec) {
    std::vector<Segment> segs;
    Segment s0;
    gk15(f, a, b, s0.value, s0.error);
    s0.a = a;
    s0.b = b;
    segs.push_back(s0);
    QuadResult r;
    for (int iter = 0; iter < spec.max_subdivisions; ++iter) {
        double total = 0.0, toterr = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < segs.size(); ++i) {
            total += segs[i].value;
            toterr += segs[i].error;
            if (segs[i].error > segs[worst].error) worst = i;
        }
        r.value = total;
        r.error = toterr;
        r.subdivisions = static_cast<int>(segs.size());
        if (toterr <= std::max(spec.abs_tol, spec.rel_tol * std::fabs(total))) {
            r.converged = true;
            return r;
        }
        Segment& w = segs[worst];
        const double mid = 0.5 * (w.a + w.b);
        if (mid <= w.a || mid >= w.b) break;  // hit machine resolution
        Segment left{w.a, mid, 0, 0}, right{mid, w.b, 0, 0};
        gk15(f, left.a, left.b, left.value, left.error);
        gk15(f, right.a, right.b, right.value, right.error);
        w = left;
        segs.push_back(right);
    }
    double total = 0.0, toterr = 0.0;
    for (const auto& s : segs) {
        total += s.value;
        toterr += s.error;
    }
    r.value = total;
    r.error = toterr;
    r.subdivisions = static_cast<int>(segs.size());
    r.converged = toterr <= std::max(spec.abs_tol, spec.rel_tol * std::fabs(total));
    return r;
}

}  // namespace detail

/// Integrate f over (a,b) without throwing; b may be +infinity.
///
/// A negative spec.singular_exponent marks a power singularity at a, removed
/// by s = a + v^2. Infinite upper limits are mapped by s = m + v/(1-v).
template <typename F>
inline QuadResult try_integrate(const F& f, double a, double b, const QuadSpec& spec) {
    if (!(a < b)) throw std::invalid_argument("quadrature: need a < b");
    const bool infinite = std::isinf(b);
    const bool singular = spec.singular_exponent < 0.0;
    if (singular && spec.singular_exponent <= -1.0)
        throw std::invalid_argument("quadrature: singular_exponent must exceed -1");

    if (infinite) {
        // Split off (a, a+1] so the singular substitution acts on a finite piece.
        const double split = a + 1.0;
        QuadSpec half = spec;
        half.abs_tol = 0.5 * spec.abs_tol;
        half.rel_tol = 0.5 * spec.rel_tol;
        QuadResult lo = try_integrate(f, a, split, half);
        QuadSpec tailspec = half;
        tailspec.singular_exponent = 0.0;
        auto mapped = [&f, split](double v) {
            const double om = 1.0 - v;
            return f(split + v / om) / (om * om);
        };
        QuadResult hi = detail::adapt(mapped, 0.0, 1.0, tailspec);
        QuadResult r;
        r.value = lo.value + hi.value;
        r.error = lo.error + hi.error;
        r.subdivisions = lo.subdivisions + hi.subdivisions;
        r.converged = lo.converged && hi.converged;
        return r;
    }

    if (singular) {
        auto transformed = [&f, a](double v) { return 2.0 * v * f(a + v * v); };
        return detail::adapt(transformed, 0.0, std::sqrt(b - a), spec);
    }
    return detail::adapt(f, a, b, spec);
}

/// Throwing variant: raises QuadratureError carrying the best estimate when
/// the requested tolerance could not be certified.
template <typename F>
inline QuadResult integrate(const F& f, double a, double b, const QuadSpec& spec) {
    QuadResult r = try_integrate(f, a, b, spec);
    if (!r.converged)
        throw QuadratureError("quadrature did not converge to requested tolerance",
                              r.value, r.error);
    return r;
}

}  // namespace bdg::quadrature

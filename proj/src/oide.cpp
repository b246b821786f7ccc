#include "bdg/oide.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace bdg::oide {

namespace {
constexpr double kTailCutoff = 50.0;  // spectral tail of g beyond this is < 1e-26
}

void SolverParams::validate() const {
    if (!(C > 0.0)) throw std::invalid_argument("SolverParams: C must be positive");
    if (!(p > 0.0) || !(p < 2.0))
        throw std::invalid_argument("SolverParams: p must lie in (0, 2)");
    if (!(t_min > 0.0) || !(t_min < t0))
        throw std::invalid_argument("SolverParams: need 0 < t_min < t0");
    series.validate();
}

const char* regime_name(Regime r) {
    switch (r) {
        case Regime::Bounded: return "Bounded";
        case Regime::PlusInfinity: return "PlusInfinity";
        case Regime::MinusInfinity: return "MinusInfinity";
        case Regime::Inconclusive: return "Inconclusive";
    }
    return "?";
}

double SolutionGrid::analytic_value(double t) const {
    return std::pow(t, 0.5 * params.p) - params.C;
}

double SolutionGrid::value(double t) const {
    if (t >= params.t0) return analytic_value(t);
    if (ts.empty()) return analytic_value(t);
    if (t <= ts.back()) {
        // continuation below the current front, slope from the last node
        return us.back() + dus.back() * (t - ts.back());
    }
    // ts is strictly decreasing; find i with ts[i+1] <= t < ts[i]
    auto it = std::lower_bound(ts.begin(), ts.end(), t, std::greater<double>());
    std::size_t i = static_cast<std::size_t>(it - ts.begin());
    if (i == 0) return us[0];
    const double t1 = ts[i - 1], t2 = ts[i];
    const double u1 = us[i - 1], u2 = us[i];
    const double d1 = dus[i - 1], d2 = dus[i];
    const double w = t1 - t2;
    const double x = (t - t2) / w;  // 0 at t2, 1 at t1
    const double x2 = x * x;
    const double h00 = (1.0 + 2.0 * x) * (1.0 - x) * (1.0 - x);
    const double h10 = x * (1.0 - x) * (1.0 - x);
    const double h01 = x2 * (3.0 - 2.0 * x);
    const double h11 = x2 * (x - 1.0);
    return h00 * u2 + h10 * w * d2 + h01 * u1 + h11 * w * d1;
}

double integral_term(double t, const SolutionGrid& grid) {
    const auto& sp = grid.params.series;
    const double ut = grid.value(t);
    const double t0 = grid.params.t0;
    const double half_p = 0.5 * grid.params.p;
    const double C = grid.params.C;
    const double s0 = t0 - t;

    double total = 0.0;
    quadrature::QuadSpec near_spec = grid.params.quad;  // singular_exponent -1/2 at 0
    if (s0 > 1e-14) {
        auto near = [&](double s) {
            return (grid.value(t + s) - ut) * densities::eval_g(s, sp);
        };
        total += quadrature::try_integrate(near, 0.0, s0, near_spec).value;
    }
    // Far part on (max(s0,0), cutoff]: U(t+s) = (t+s)^{p/2} - C. The s = v^2
    // substitution keeps the transformed integrand bounded uniformly in s0.
    const double lo = std::max(s0, 0.0);
    auto far_v = [&](double v) {
        const double s = v * v;
        const double diff = std::pow(t + s, half_p) - C - ut;
        return 2.0 * v * diff * densities::eval_g(s, sp);
    };
    quadrature::QuadSpec far_spec = grid.params.quad;
    far_spec.singular_exponent = 0.0;
    total += quadrature::try_integrate(far_v, std::sqrt(lo), std::sqrt(kTailCutoff),
                                       far_spec)
                 .value;
    return total;
}

double rhs(double t, const SolutionGrid& grid) {
    if (!(t > 0.0) || t > grid.params.t0)
        throw std::domain_error("rhs: t must lie in (0, t0]");
    return (grid.params.p * grid.value(t) + integral_term(t, grid)) / (2.0 * t);
}

namespace {

void push_node(SolutionGrid& g, double t, double u, double du) {
    g.ts.push_back(t);
    g.us.push_back(u);
    g.dus.push_back(du);
}

void pop_node(SolutionGrid& g) {
    g.ts.pop_back();
    g.us.pop_back();
    g.dus.pop_back();
}

}  // namespace

SolutionGrid solve(const SolverParams& params, const RegimeThresholds& thresholds) {
    params.validate();
    SolutionGrid grid;
    grid.params = params;

    const double t0 = params.t0;
    double t = t0;
    double u = grid.analytic_value(t0);
    push_node(grid, t, u, 0.0);
    double k1 = rhs(t0, grid);
    grid.dus[0] = k1;
    grid.left_derivative_at_t0 = k1;

    const StepPolicy& pol = params.grid;
    double h = std::min(pol.initial_step, pol.max_step);
    const double tol = pol.tol;

    while (t > params.t_min * (1.0 + 1e-12)) {
        h = std::min({h, pol.max_step, pol.t_fraction * t, t - params.t_min});
        h = std::max(h, std::min(pol.min_step, t - params.t_min));

        // Bogacki-Shampine 3(2), marching downward. Stage evaluations extend
        // the grid provisionally so the integral term sees consistent values.
        push_node(grid, t - 0.5 * h, u - 0.5 * h * k1, k1);
        const double k2 = rhs(t - 0.5 * h, grid);
        pop_node(grid);

        push_node(grid, t - 0.75 * h, u - 0.75 * h * k2, k2);
        const double k3 = rhs(t - 0.75 * h, grid);
        pop_node(grid);

        const double u_new = u - h * (2.0 * k1 + 3.0 * k2 + 4.0 * k3) / 9.0;
        push_node(grid, t - h, u_new, k3);
        const double k4 = rhs(t - h, grid);
        const double err =
            h * std::fabs(-5.0 / 72.0 * k1 + k2 / 12.0 + k3 / 9.0 - k4 / 8.0);

        if (err <= tol) {
            grid.dus.back() = k4;
            t -= h;
            u = u_new;
            k1 = k4;
            const double diff = u - grid.analytic_value(t);
            if (diff > thresholds.blowup_hi) {
                grid.regime = Regime::PlusInfinity;
                grid.u_at_floor = u;
                return grid;
            }
            if (diff < -thresholds.crossing_margin - 1e-13) {
                grid.regime = Regime::MinusInfinity;
                grid.u_at_floor = u;
                return grid;
            }
            const double grow = err > 0.0 ? 0.9 * std::cbrt(tol / err) : 5.0;
            h *= std::clamp(grow, 0.2, 5.0);
        } else {
            pop_node(grid);
            h *= std::max(0.2, 0.9 * std::cbrt(tol / err));
            if (h < pol.min_step)
                throw StepUnderflowError("oide::solve: step size underflow at t=" +
                                         std::to_string(t));
        }
    }

    grid.u_at_floor = u;
    bool monotone = true, above = true;
    // slack 1e-4: the unstable mode always produces microscopic upticks near
    // the floor before a genuine divergence becomes visible
    for (std::size_t i = 0; i < grid.ts.size(); ++i) {
        if (i > 0 && grid.us[i] > grid.us[i - 1] + 1e-4) monotone = false;
        if (grid.us[i] < grid.analytic_value(grid.ts[i]) - 1e-6) above = false;
    }
    grid.regime = (monotone && above) ? Regime::Bounded : Regime::Inconclusive;
    return grid;
}

double pasting_gap(const SolutionGrid& grid) {
    const double p = grid.params.p;
    const double t0 = grid.params.t0;
    return grid.left_derivative_at_t0 - 0.5 * p * std::pow(t0, 0.5 * p - 1.0);
}

void write_csv(const SolutionGrid& grid, std::ostream& os) {
    os << "t,U,analytic_floor\n";
    for (std::size_t i = 0; i < grid.ts.size(); ++i)
        os << grid.ts[i] << ',' << grid.us[i] << ','
           << grid.analytic_value(grid.ts[i]) << '\n';
}

}  // namespace bdg::oide

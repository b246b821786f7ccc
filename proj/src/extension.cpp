#include "bdg/extension.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace bdg::extension {

namespace {
constexpr double kConvCutoff = 60.0;  // f^h tail beyond this is < 1e-30
}

ExtendedValue ExtendedValue::from_solution(oide::SolutionGrid grid,
                                           densities::SeriesParams series,
                                           double max_departure) {
    ExtendedValue ev;
    ev.series = series;
    ev.t_trust = grid.ts.empty() ? 0.0 : grid.ts.back();
    const double p = grid.params.p;
    const double C = grid.params.C;
    // The true solution is nondecreasing in t; the first uptick along the
    // backward sweep marks where the unstable mode takes over.
    for (std::size_t i = 0; i + 1 < grid.ts.size(); ++i) {
        const double dep = grid.us[i + 1] - (std::pow(grid.ts[i + 1], 0.5 * p) - C);
        if (grid.us[i + 1] > grid.us[i] + 1e-10 || dep > max_departure) {
            ev.t_trust = grid.ts[i];
            break;
        }
    }
    ev.base = std::move(grid);
    return ev;
}

double ExtendedValue::eval(double t, double b, double bstar) const {
    if (t < 0.0) throw std::domain_error("eval_extended: t must be >= 0");
    if (bstar < 0.0 || std::fabs(b) > bstar * (1.0 + 1e-12))
        throw std::domain_error("eval_extended: need |b| <= bstar");
    const double p = base.params.p;
    if (bstar == 0.0) {
        // scaling limit along bstar -> 0; the state (0,0,0) anchors at 0
        return t == 0.0 ? 0.0 : std::pow(t, 0.5 * p);
    }
    const double tp = t / (bstar * bstar);
    const double bp = std::min(std::fabs(b) / bstar, 1.0);
    const double scale = std::pow(bstar, p);
    const double h = 1.0 - bp;
    auto base_value = [this](double tq) {
        return base.value(std::max(tq, t_trust));
    };
    if (h < 1e-12) return scale * base_value(tp);

    const double t0 = base.params.t0;
    const double C = base.params.C;
    const double s0 = std::max(t0 - tp, 0.0);
    double acc = 0.0;
    if (s0 > 1e-14) {
        auto grid_part = [&](double s) {
            return base_value(tp + s) * densities::eval_fh(h, s, series);
        };
        // f^h concentrates on the scale h^2 for small h; seed the adaptive
        // rule with a split there.
        const double peak = std::min(4.0 * h * h, s0);
        if (peak > 1e-14 && peak < s0) {
            acc += quadrature::try_integrate(grid_part, 0.0, peak, quad).value;
            acc += quadrature::try_integrate(grid_part, peak, s0, quad).value;
        } else {
            acc += quadrature::try_integrate(grid_part, 0.0, s0, quad).value;
        }
    }
    auto analytic_part = [&](double s) {
        return (std::pow(tp + s, 0.5 * p) - C) * densities::eval_fh(h, s, series);
    };
    acc += quadrature::try_integrate(analytic_part, s0, kConvCutoff, quad).value;
    return scale * acc;
}

std::pair<double, double> boundary_derivatives(const ExtendedValue& ev, double t) {
    if (!(t > 0.0)) throw std::domain_error("boundary_derivatives: t must be > 0");
    const double t0 = ev.base.params.t0;
    if (t == t0)
        throw std::invalid_argument(
            "boundary_derivatives: one-sided limits differ at t0");
    const double db = -oide::integral_term(t, ev.base);
    const double dbstar = t < t0 ? 0.0 : -db - ev.base.params.C;
    return {db, dbstar};
}

double hedge_integrand(const HedgeEvaluator& he, double t, double b, double bstar) {
    const ExtendedValue& ev = *he.value;
    const double d = he.fd_step;
    if (std::fabs(b) > bstar)
        throw std::domain_error("hedge_integrand: state outside D");
    if (bstar - std::fabs(b) > d) {
        return (ev.eval(t, b + d, bstar) - ev.eval(t, b - d, bstar)) / (2.0 * d);
    }
    // one-sided, second order, stencil pointing inward
    const double dir = b >= 0.0 ? -1.0 : 1.0;
    const double f0 = ev.eval(t, b, bstar);
    const double f1 = ev.eval(t, b + dir * d, bstar);
    const double f2 = ev.eval(t, b + 2.0 * dir * d, bstar);
    return dir * (-1.5 * f0 + 2.0 * f1 - 0.5 * f2) / d;
}

double concavity_margin(const ExtendedValue& ev, double t, double b, double bstar,
                        double alpha, double beta) {
    const double pw = beta / (alpha + beta);
    const double qw = alpha / (alpha + beta);
    const double ua = ev.eval(t + alpha * alpha, b + alpha,
                              std::max(bstar, std::fabs(b + alpha)));
    const double ub = ev.eval(t + beta * beta, b - beta,
                              std::max(bstar, std::fabs(b - beta)));
    return pw * ua + qw * ub - ev.eval(t, b, bstar);
}

ConcavityLattice ConcavityLattice::default_near_kink(double t0_hat) {
    ConcavityLattice lat;
    for (int i = 0; i <= 8; ++i)
        lat.t_scaled.push_back(0.5 * t0_hat + (1.3 - 0.5) * t0_hat * i / 8.0);
    for (int i = 0; i <= 4; ++i) lat.b_scaled.push_back(0.8 + 0.05 * i);
    for (int i = 0; i < 6; ++i) {
        const double x = 0.01 * std::pow(50.0, i / 5.0);  // log-spaced 0.01 .. 0.5
        lat.alphas.push_back(x);
        lat.betas.push_back(x);
    }
    return lat;
}

ConcavityTriple concavity_search(const ExtendedValue& ev,
                                 const ConcavityLattice& lattice) {
    if (lattice.t_scaled.empty() || lattice.b_scaled.empty() ||
        lattice.alphas.empty() || lattice.betas.empty())
        throw std::invalid_argument("concavity_search: empty lattice");
    ConcavityTriple best;
    best.margin = -std::numeric_limits<double>::infinity();
    for (double ts : lattice.t_scaled) {
        for (double bs : lattice.b_scaled) {
            const double u0 = ev.eval(ts, bs, 1.0);
            for (double a : lattice.alphas) {
                const double ua = ev.eval(ts + a * a, bs + a,
                                          std::max(1.0, std::fabs(bs + a)));
                for (double bb : lattice.betas) {
                    const double ub = ev.eval(ts + bb * bb, bs - bb,
                                              std::max(1.0, std::fabs(bs - bb)));
                    const double pw = bb / (a + bb);
                    const double qw = a / (a + bb);
                    const double margin = pw * ua + qw * ub - u0;
                    if (margin > best.margin) {
                        best = {ts, bs, 1.0, a, bb, margin};
                    }
                }
            }
        }
    }
    return best;
}

HedgeTable::HedgeTable(const ExtendedValue& ev, double t_scaled_max, int n_t_fine,
                       int n_t_coarse, int n_b) {
    t_max_ = t_scaled_max;
    t_split_ = std::min(2.5 * ev.base.params.t0, 0.5 * t_scaled_max);
    p_ = ev.base.params.p;
    nb_ = n_b;
    t_nodes_.clear();
    for (int i = 0; i < n_t_fine; ++i)
        t_nodes_.push_back(t_split_ * i / n_t_fine);
    for (int i = 0; i <= n_t_coarse; ++i)
        t_nodes_.push_back(t_split_ + (t_max_ - t_split_) * i / n_t_coarse);

    const double db = 1.0 / (n_b - 1);
    hb_.assign(t_nodes_.size(), std::vector<double>(n_b, 0.0));
    std::vector<double> u(n_b);
    for (std::size_t it = 0; it < t_nodes_.size(); ++it) {
        const double t = t_nodes_[it];
        for (int ib = 0; ib < nb_; ++ib) u[ib] = ev.eval(t, ib * db, 1.0);
        for (int ib = 0; ib < nb_; ++ib) {
            if (ib == 0)
                hb_[it][ib] = 0.0;  // U even in b
            else if (ib == nb_ - 1)
                hb_[it][ib] = (1.5 * u[ib] - 2.0 * u[ib - 1] + 0.5 * u[ib - 2]) / db;
            else
                hb_[it][ib] = (u[ib + 1] - u[ib - 1]) / (2.0 * db);
        }
    }
}

double HedgeTable::lookup(double ts, double bs) const {
    if (ts >= t_max_) return -bs / std::sqrt(std::max(ts, 1e-300));
    auto upper = std::upper_bound(t_nodes_.begin(), t_nodes_.end(), ts);
    std::size_t hi = static_cast<std::size_t>(upper - t_nodes_.begin());
    if (hi == 0) hi = 1;
    if (hi >= t_nodes_.size()) hi = t_nodes_.size() - 1;
    const std::size_t it = hi - 1;
    const double t1 = t_nodes_[it], t2 = t_nodes_[hi];
    const double wt = t2 > t1 ? (ts - t1) / (t2 - t1) : 0.0;

    const double db = 1.0 / (nb_ - 1);
    double x = bs / db;
    int ib = std::min(static_cast<int>(x), nb_ - 2);
    const double wb = x - ib;
    const double lo = hb_[it][ib] * (1.0 - wb) + hb_[it][ib + 1] * wb;
    const double hi_v = hb_[hi][ib] * (1.0 - wb) + hb_[hi][ib + 1] * wb;
    return lo * (1.0 - wt) + hi_v * wt;
}

double HedgeTable::operator()(double t, double b, double bstar) const {
    if (bstar <= 0.0) return 0.0;
    const double ts = t / (bstar * bstar);
    double bs = b / bstar;
    bs = std::clamp(bs, -1.0, 1.0);
    const double sign = bs < 0.0 ? -1.0 : 1.0;
    const double scale = p_ == 1.0 ? 1.0 : std::pow(bstar, p_ - 1.0);
    return sign * scale * lookup(ts, sign * bs);
}

}  // namespace bdg::extension

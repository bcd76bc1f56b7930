#include "levyopt/solution_curves.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>

namespace levyopt {

SolutionCurves::SolutionCurves(double g_star, double p, bool consumption, double horizon, double x0)
    : g_star_(g_star), p_(p), consumption_(consumption), horizon_(horizon), x0_(x0), a_(p / (1.0 - p) * g_star) {
    if (!std::isfinite(g_star)) throw DomainError("curves need a finite optimal growth value");
    if (p == 0.0 || p >= 1.0) throw DomainError("utility exponent must lie in (-inf, 1) without 0");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("horizon must be positive and finite");
    if (!(x0 > 0.0)) throw DomainError("initial wealth must be positive");
}

double SolutionCurves::f(double tau) const {
    if (std::abs(a_) < kZeroRateThreshold) return 1.0 + tau;
    return std::exp(a_ * tau) + std::expm1(a_ * tau) / a_;
}

void SolutionCurves::check_time(double t) const {
    if (!(t >= 0.0 && t <= horizon_)) throw DomainError("time outside [0, T]");
}

double SolutionCurves::ell(double t) const {
    check_time(t);
    const double tau = horizon_ - t;
    if (!consumption_) return std::exp(p_ * g_star_ * tau);
    return std::pow(f(tau), 1.0 - p_);
}

double SolutionCurves::kappa(double t) const {
    if (!consumption_) throw DomainError("no consumption in this problem");
    check_time(t);
    return 1.0 / f(horizon_ - t);
}

double SolutionCurves::cumulative_kappa(double t) const {
    check_time(t);
    if (!consumption_) return 0.0;
    // d/dt log f(T - t) = -f'/f and f' = a f + 1, so 1/f = -(d/dt) log f(T - t) - a.
    const double rate = std::abs(a_) < kZeroRateThreshold ? 0.0 : a_;
    return std::log(f(horizon_)) - std::log(f(horizon_ - t)) - rate * t;
}

double SolutionCurves::value() const { return ell(0.0) * std::pow(x0_, p_) / p_; }

SolutionCurves build_curves(double g_star, double p, bool consumption, double horizon, double x0) {
    return SolutionCurves(g_star, p, consumption, horizon, x0);
}

double verify_bellman_ode(const SolutionCurves& curves, double g_star, double p, bool consumption, int samples) {
    namespace odeint = boost::numeric::odeint;
    using State = std::array<double, 1>;
    const double delta = consumption ? 1.0 : 0.0;
    // In tau = T - t: d ell / d tau = -delta (p - 1) ell^{p/(p-1)} + p g ell.
    auto rhs = [&](const State& x, State& dxdt, double) {
        dxdt[0] = -delta * (p - 1.0) * std::pow(x[0], p / (p - 1.0)) + p * g_star * x[0];
    };
    auto stepper = odeint::make_dense_output(1e-13, 1e-13, odeint::runge_kutta_dopri5<State>());
    const double T = curves.horizon();
    const int n = std::max(samples, 1);
    std::vector<double> taus(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) taus[static_cast<std::size_t>(k)] = T * k / n;
    State state{1.0};
    double worst = 0.0;
    odeint::integrate_times(stepper, rhs, state, taus.begin(), taus.end(), T / (10.0 * n),
                            [&](const State& x, double tau) {
                                const double t = std::clamp(T - tau, 0.0, T);
                                worst = std::max(worst, std::abs(x[0] - curves.ell(t)));
                            });
    return worst;
}

}  // namespace levyopt

#pragma once

#include "levyopt/common.hpp"

namespace levyopt {

/// Deterministic opportunity process, consumption propensity and value for a solved problem.
///
/// With tau = T - t and f(tau) = ((1 + a) e^{a tau} - 1) / a (f = 1 + tau at a = 0):
/// consumption gives ell = f^{1-p} and kappa = 1 / f; without it ell = exp(p g tau).
class SolutionCurves {
public:
    SolutionCurves(double g_star, double p, bool consumption, double horizon, double x0);

    double a() const noexcept { return a_; }
    double g_star() const noexcept { return g_star_; }
    double p() const noexcept { return p_; }
    bool consumption() const noexcept { return consumption_; }
    double horizon() const noexcept { return horizon_; }
    double x0() const noexcept { return x0_; }

    double ell(double t) const;
    /// Optimal propensity to consume; DomainError without consumption.
    double kappa(double t) const;
    /// int_0^t kappa(s) ds (zero without consumption).
    double cumulative_kappa(double t) const;
    /// ell_0 x0^p / p.
    double value() const;

private:
    double f(double tau) const;
    void check_time(double t) const;

    double g_star_;
    double p_;
    bool consumption_;
    double horizon_;
    double x0_;
    double a_;
};

/// Threshold below which a is treated as zero.
inline constexpr double kZeroRateThreshold = 1e-12;

SolutionCurves build_curves(double g_star, double p, bool consumption, double horizon, double x0);

/// Integrates the Bernoulli equation for ell backward from ell_T = 1 with an adaptive
/// Dormand-Prince scheme and returns the largest deviation from the closed form on a
/// uniform grid of `samples` + 1 points.
double verify_bellman_ode(const SolutionCurves& curves, double g_star, double p, bool consumption,
                          int samples = 200);

}  // namespace levyopt

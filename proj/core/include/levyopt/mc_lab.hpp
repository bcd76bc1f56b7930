#pragma once

#include "levyopt/constraints.hpp"
#include "levyopt/levy_model.hpp"
#include "levyopt/solution_curves.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace levyopt {

struct Jump {
    double time = 0.0;
    Vector mark;
};

/// One simulated path: continuous martingale part at the grid points and the jumps in time order.
struct Path {
    Matrix continuous;  ///< d x (steps + 1); column k is R^c at t_k
    std::vector<Jump> jumps;
};

class JumpSampler;

/// Reproducible batch of paths of R. Paths are regenerated on demand from a counter-based
/// stream keyed by (seed, path index), so memory stays flat and any subset can be replayed.
class PathBatch {
public:
    std::size_t size() const noexcept { return n_paths_; }
    int steps() const noexcept { return steps_; }
    double horizon() const noexcept { return horizon_; }
    std::uint64_t seed() const noexcept { return seed_; }
    double time(int k) const { return horizon_ * k / steps_; }
    Eigen::Index dim() const { return drift_.size(); }

    /// Drift of the finite-variation part after removing the compensator: b - int h dF.
    const Vector& drift() const noexcept { return drift_; }
    const Matrix& covariance() const noexcept { return covariance_; }
    /// Linear map applied to every path (identity for a fresh batch).
    const Matrix& map() const noexcept { return map_; }
    const LevyTriplet& source() const noexcept { return *source_; }

    Path path(std::size_t index) const;

    /// Same random numbers, every path replaced by Lambda times itself.
    PathBatch mapped(const Matrix& Lambda) const;

private:
    friend PathBatch simulate_paths(const LevyTriplet&, double, std::size_t, int, std::uint64_t, const Tolerances&);

    std::size_t n_paths_ = 0;
    int steps_ = 1;
    double horizon_ = 1.0;
    std::uint64_t seed_ = 0;
    Vector drift_;
    Matrix covariance_;
    Matrix factor_;  ///< factor_ factor_^T = c of the source triplet
    Matrix map_;
    std::shared_ptr<const LevyTriplet> source_;
    std::shared_ptr<const JumpSampler> sampler_;
};

/// Exact scheme: Poisson jump times, marks from the normalized jump measure, Gaussian
/// increments of the continuous part on a uniform grid of `steps` intervals.
/// Throws InfiniteActivity when a density part has infinite mass.
PathBatch simulate_paths(const LevyTriplet& triplet, double horizon, std::size_t n_paths, int steps,
                         std::uint64_t seed, const Tolerances& tol = {});

/// Consumption propensity as a function of time with its running integral.
struct ConsumptionPlan {
    std::function<double(double)> rate;
    std::function<double(double)> cumulative;

    bool active() const { return static_cast<bool>(rate); }
    static ConsumptionPlan none() { return {}; }
    static ConsumptionPlan constant(double kappa);
    static ConsumptionPlan from_curves(const SolutionCurves& curves);
};

struct PathWealth {
    Vector values;          ///< wealth at the grid points
    bool absorbed = false;  ///< some jump had 1 + pi . x <= 0
};

PathWealth wealth_path(const PathBatch& batch, std::size_t index, const Vector& pi, const ConsumptionPlan& plan,
                       double x0);

struct WealthPaths {
    Matrix values;  ///< n x (steps + 1)
    std::size_t absorbed = 0;
};

WealthPaths wealth_paths(const PathBatch& batch, const Vector& pi, const ConsumptionPlan& plan, double x0);

struct UtilityEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
    std::size_t n_paths = 0;
    std::size_t absorbed = 0;
};

/// Sample mean of int U(kappa X) dt (trapezoid on the grid, consumption only) + U(X_T).
/// Absorbed paths count as U(0): -inf for p < 0 (the estimate is then -inf), 0 for p > 0.
UtilityEstimate expected_utility(const PathBatch& batch, const Vector& pi, const ConsumptionPlan& plan, double p,
                                 double x0);

/// Terminal value of the exponential Levy martingale
/// E(k pi . R^c + {(1 + pi . x)^k - 1} * (mu - nu)) on every path.
Vector exponential_martingale_terminal(const PathBatch& batch, const Vector& pi, double power,
                                       const Tolerances& tol = {});

/// Mean and standard error of a sample.
UtilityEstimate sample_mean(const Vector& samples);

struct VerificationReport {
    double gamma_start = 0.0;
    UtilityEstimate gamma_end;
    bool gamma_pass = false;
    UtilityEstimate psi_end;
    bool psi_pass = false;
    double sigmas = 3.0;

    bool passed() const { return gamma_pass && psi_pass; }
};

/// Checks that ell X^p + int kappa ell X^p ds and the stochastic exponential of
/// p pi . R^c + {(1 + pi . x)^p - 1} * (mu - nu) keep their initial expectations.
VerificationReport verification_test(const PathBatch& batch, const Vector& pi_hat, const SolutionCurves& curves,
                                     double sigmas = 3.0, const Tolerances& tol = {});

/// Deterministic panel of perturbed portfolios inside C and the strict natural constraints.
std::vector<Vector> perturbation_panel(const Vector& pi_hat, const ConstraintSet& C, const LevyTriplet& triplet,
                                       int count = 20, double radius = 0.1);

}  // namespace levyopt

#pragma once

#include "levyopt/constraints.hpp"
#include "levyopt/levy_model.hpp"
#include "levyopt/optimizer.hpp"

#include <optional>
#include <string>
#include <vector>

namespace levyopt {

/// Dual martingale measure of an unconstrained, consumption-free power investor.
struct QMeasureReport {
    double p = 0.0;
    double q = 0.0;                  ///< p / (p - 1)
    bool exists = false;
    bool marginal = false;           ///< |drift_residual| within a decade of the threshold
    double drift_residual = 0.0;     ///< directional derivative of g from the optimum towards 0
    double threshold = 0.0;
    Vector pi_hat;
    Vector girsanov_continuous;      ///< (p - 1) pi_hat
    std::optional<LevyTriplet> triplet_under_Q;  ///< filled when exists
    std::vector<std::string> warnings;

    /// Jump reweighting (1 + pi_hat . x)^{p-1}.
    double girsanov_jump(const Vector& x) const;
};

/// PreconditionFailed when C is not the whole space, consumption is on, or the solution
/// carries no finite optimum.
QMeasureReport q_optimal_exists(const LevyTriplet& triplet, double p, const PortfolioSolution& solution,
                                const ConstraintSet& C, bool consumption, const Tolerances& tol = {});

/// Triplet of R under the reweighted measure (drift b + (p - 1) c pi + int h [w - 1] dF, same c,
/// jumps reweighted by w = (1 + pi . x)^{p-1}).
LevyTriplet reweighted_triplet(const LevyTriplet& triplet, const Vector& pi_hat, double p, const Tolerances& tol = {});

/// Per-asset drift of R under the measure: b + int (x - h(x)) F(dx). TailDivergence when a
/// heavy tail makes the first moment infinite.
Vector martingale_residuals(const LevyTriplet& triplet, const Tolerances& tol = {});

}  // namespace levyopt

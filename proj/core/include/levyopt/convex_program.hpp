#pragma once

#include "levyopt/constraints.hpp"

#include <functional>
#include <optional>

namespace levyopt {

/// Feasible region: intersection of linear and norm inequalities.
struct ConvexRegion {
    Eigen::Index dim = 0;
    std::vector<LinearIneq> linear;
    std::vector<NormIneq> norms;

    bool contains(const Vector& y, double tol = 1e-9) const;
};

/// Smooth concave objective to maximize. `value` returns -inf where undefined.
struct ConcaveObjective {
    std::function<double(const Vector&)> value;
    std::function<Vector(const Vector&)> gradient;
    std::function<Matrix(const Vector&)> hessian;
};

ConcaveObjective linear_objective(const Vector& c);

struct BarrierOptions {
    double mu_start = 1.0;
    double mu_factor = 0.2;
    double mu_final = 1e-13;
    double regularization = 1e-2;  ///< Tikhonov weight relative to mu, pulls towards the origin
    int max_newton = 100;
    double divergence_norm = 1e12;
    std::optional<Vector> start;   ///< warm start; ignored unless strictly feasible
};

struct BarrierResult {
    Vector x;
    double value = -kInf;
    int iterations = 0;
    bool converged = false;
    double final_mu = 0.0;
};

/// Affine parametrization y = origin + basis z of the smallest face carrying the region's relative interior.
struct AffineReduction {
    Vector origin;
    Matrix basis;               ///< orthonormal columns
    ConvexRegion reduced;       ///< region in z coordinates without implicit equalities
    Vector interior;            ///< strictly feasible z
    bool empty = false;

    Vector lift(const Vector& z) const { return origin + basis * z; }
};

/// Detects implicit equalities and finds a relatively interior point. `empty` when infeasible.
AffineReduction reduce_region(const ConvexRegion& region);

/// Log-barrier Newton ascent in the reduced coordinates, started from `reduction.interior`.
BarrierResult maximize_barrier(const ConcaveObjective& f, const AffineReduction& reduction,
                               const BarrierOptions& options = {});

/// Convenience: reduce then maximize; result in original coordinates. Returns nullopt when infeasible.
std::optional<BarrierResult> maximize_over(const ConcaveObjective& f, const ConvexRegion& region,
                                           const BarrierOptions& options = {});

/// Minimizes |y - target|^2 over the region.
std::optional<Vector> project_onto_region(const Vector& target, const ConvexRegion& region);

}  // namespace levyopt

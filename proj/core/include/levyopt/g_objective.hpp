#pragma once

#include "levyopt/geometry.hpp"
#include "levyopt/levy_model.hpp"

#include <vector>

namespace levyopt {

/// Extended-real value of the objective; +-inf are explicit, never the result of overflow.
struct GValue {
    double value = 0.0;
    double error = 0.0;          ///< summed quadrature error estimate
    bool boundary_atom = false;  ///< some atom had 1 + y . x <= 0
    bool tail_divergent = false; ///< a power tail made the integral infinite
};

/// Concave objective of a power investor built from the triplet; evaluations are pure and thread-safe.
class Objective {
public:
    Objective(LevyTriplet triplet, double p, Tolerances tol = {});

    const LevyTriplet& triplet() const { return triplet_; }
    double p() const { return p_; }
    const NaturalConstraints& natural() const { return natural_; }
    const Tolerances& tolerances() const { return tol_; }

    bool in_domain(const Vector& y) const;

    /// Throws DomainError outside C0, QuadratureFailure when an error estimate is too large.
    GValue value(const Vector& y) const;

    /// Directional derivative from y towards target.
    double directional(const Vector& target, const Vector& y) const;

    /// Gradient at a point of the strict domain (finite values only).
    Vector gradient(const Vector& y) const;
    Matrix hessian(const Vector& y) const;

    /// Values at lambda_i y, lambda_i = i / (n - 1).
    std::vector<GValue> on_segment(const Vector& y, int n) const;

    /// Finite value of g or -inf; never throws for points outside C0 (returns -inf).
    double value_or_minus_inf(const Vector& y) const;

private:
    void check_domain(const Vector& y) const;
    void check_error(double error, double l1) const;

    LevyTriplet triplet_;
    double p_;
    Tolerances tol_;
    NaturalConstraints natural_;
};

GValue eval_g(const Vector& y, const LevyTriplet& triplet, double p, const Tolerances& tol = {});
double eval_G(const Vector& target, const Vector& y, const LevyTriplet& triplet, double p, const Tolerances& tol = {});
std::vector<GValue> eval_g_on_segment(const Vector& y, const LevyTriplet& triplet, double p, int n,
                                      const Tolerances& tol = {});

/// ((1 + u)^p - 1) / p evaluated without cancellation for small u.
double power_increment(double u, double p);

}  // namespace levyopt

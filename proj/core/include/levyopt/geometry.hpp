#pragma once

#include "levyopt/constraints.hpp"
#include "levyopt/levy_model.hpp"

#include <string>
#include <vector>

namespace levyopt {

/// Portfolios keeping wealth nonnegative against every possible jump.
///
/// `halfspaces` describe the closed set (a . y <= bound). `atoms` are the points where the
/// strict version 1 + y . x > 0 is required for strictly positive wealth.
struct NaturalConstraints {
    Eigen::Index dim = 0;
    std::vector<LinearIneq> halfspaces;
    std::vector<Vector> atoms;

    bool contains(const Vector& y, double tol = 1e-9) const;
    /// Strict version: additionally 1 + y . x > tol at every atom.
    bool contains_strict(const Vector& y, double tol = 1e-9) const;
    bool unconstrained() const { return halfspaces.empty(); }
    /// Largest t with t u in the closed set (u need not be normalized); +inf if unbounded.
    double radial_extent(const Vector& u) const;
};

NaturalConstraints natural_constraints(const LevyTriplet& triplet);

/// Orthonormal basis (columns) of the null investments; d x 0 when trivial.
Matrix null_space(const LevyTriplet& triplet, double tol = 1e-9);

Vector project_onto_N_perp(const Vector& y, const Matrix& null_basis);

enum class Closedness { yes, no, unknown };
std::string to_string(Closedness c);

Closedness projection_closedness(const ConstraintSet& C, const Matrix& null_basis);

/// Whether C + N = C, i.e. every null direction is a two-sided recession direction of C.
bool invariant_under_null_space(const ConstraintSet& C, const Matrix& null_basis, double tol = 1e-9);

enum class NuipStatus { holds, violated, undecidable };
std::string to_string(NuipStatus s);

struct NuipVerdict {
    NuipStatus status = NuipStatus::holds;
    Vector witness;      ///< unit vector in J intersected with the recession cone when violated
    std::string reason;
};

NuipVerdict nuip_check(const LevyTriplet& triplet, const ConstraintSet& C, const Tolerances& tol = {});

/// Clause-by-clause check that y lies in the immediate-arbitrage cone J.
struct JMembership {
    double c_residual = 0.0;        ///< |c y|
    double min_jump_gain = 0.0;     ///< inf of y . x over supp(F) (+inf without jumps)
    double net_drift = 0.0;         ///< y . b - int y . h dF
    double null_distance = 0.0;     ///< distance of y from N
    bool member(double tol = 1e-9) const;
};
JMembership j_membership(const LevyTriplet& triplet, const Vector& y, const Tolerances& tol = {});

struct ConstraintGeometry {
    NaturalConstraints natural;
    Matrix null_basis;
    std::vector<Vector> recession_rays;
    NuipVerdict nuip;
    Closedness projection_closed = Closedness::unknown;
};

ConstraintGeometry analyze_geometry(const LevyTriplet& triplet, const ConstraintSet& C, const Tolerances& tol = {});

/// Extreme rays of the recession cone of a polyhedral piece intersected with C0 (d <= 3 enumerates exactly).
std::vector<Vector> recession_rays(const ConvexPiece& piece, const NaturalConstraints& natural, double tol = 1e-9);

}  // namespace levyopt

#pragma once

#include "levyopt/constraints.hpp"
#include "levyopt/geometry.hpp"
#include "levyopt/levy_model.hpp"

#include <string>
#include <vector>

namespace levyopt {

/// Linear change of assets R -> Lambda R after which every tradable asset has a positive price.
struct ModelTransform {
    Matrix Lambda;
    std::vector<Vector> steps;         ///< row chosen at each step (zero when the component is untradable)
    Matrix pinv_Lambda_T;              ///< Moore-Penrose right inverse of Lambda^T
    LevyTriplet triplet;               ///< transformed triplet
    ConstraintSet constraints = ConstraintSet::unconstrained(1);  ///< {z : Lambda^T z in C}, compactified if C is
    std::vector<std::string> notes;
};

ModelTransform build_transform(const LevyTriplet& triplet, const ConstraintSet& C, const Tolerances& tol = {});

/// Triplet of Lambda R under the fixed cutoff (drift corrected for h(Lambda x) != Lambda h(x)).
LevyTriplet transform_triplet(const LevyTriplet& triplet, const Matrix& Lambda, const Tolerances& tol = {});

/// Lambda^T z; DomainError if z is outside the transformed constraints.
Vector map_portfolio_back(const Vector& z, const ModelTransform& transform);

}  // namespace levyopt

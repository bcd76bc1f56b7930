#pragma once

#include "levyopt/constraints.hpp"
#include "levyopt/convex_program.hpp"
#include "levyopt/g_objective.hpp"
#include "levyopt/geometry.hpp"
#include "levyopt/levy_model.hpp"

#include <string>
#include <vector>

namespace levyopt {

enum class Location { interior, c_boundary, c0_boundary };
enum class FinitenessVerdict { finite, infinite_value, nuip_violated, undecided };
enum class FinitenessClass { finite, infinite, undecided };

std::string to_string(Location l);
std::string to_string(FinitenessVerdict v);
std::string to_string(FinitenessClass c);

struct PortfolioSolution {
    Vector pi_hat;                 ///< minimal-norm representative of the optimal class
    double g_star = 0.0;           ///< maximum (or supremum estimate when not attained)
    double a = 0.0;                ///< p / (1 - p) * g_star
    Location location = Location::interior;
    double G_at_zero = 0.0;
    FinitenessVerdict finiteness = FinitenessVerdict::finite;
    bool maximizer_attained = true;
    bool representative_in_C = true;  ///< false when only the projection onto N-perp could be returned
    Vector nuip_witness;
    int iterations = 0;
    double tolerance_achieved = 0.0;
    std::vector<std::string> warnings;
    std::vector<Vector> alternative_argmax;
};

struct OptimizerOptions {
    int starts_per_dim = 64;
    BarrierOptions barrier;
};

PortfolioSolution maximize_convex(const LevyTriplet& triplet, const ConstraintSet& C, double p,
                                  const Tolerances& tol = {}, const OptimizerOptions& options = {});

PortfolioSolution maximize_nonconvex(const LevyTriplet& triplet, const ConstraintSet& C, double p,
                                     const Tolerances& tol = {}, const OptimizerOptions& options = {});

/// Dispatches on the shape of C.
PortfolioSolution solve_portfolio(const LevyTriplet& triplet, const ConstraintSet& C, double p,
                                  const Tolerances& tol = {}, const OptimizerOptions& options = {});

struct C3Report {
    bool holds = true;
    bool sampled = false;  ///< verdict relies on sampled points
};

C3Report check_C3(const ConstraintSet& C, const NaturalConstraints& natural);

FinitenessClass classify_finiteness(const LevyTriplet& triplet, const ConstraintSet& C, double p,
                                    const Tolerances& tol = {});

}  // namespace levyopt

#pragma once

#include "levyopt/constraints.hpp"
#include "levyopt/levy_model.hpp"

#include <cstdint>
#include <string>

namespace levyopt {

/// Investor preferences, horizon and admissible portfolios.
struct ProblemSpec {
    double p = 0.5;
    bool consumption = false;
    double horizon = 1.0;
    double x0 = 1.0;
    ConstraintSet constraints = ConstraintSet::unconstrained(1);
    Tolerances tol;
};

struct SimulationSettings {
    std::size_t paths = 10000;
    int steps = 50;
    std::uint64_t seed = 1;
};

/// Everything a model file declares.
struct Model {
    std::string name;
    LevyTriplet triplet;
    ProblemSpec problem;
    SimulationSettings simulation;
};

}  // namespace levyopt

#pragma once

#include "levyopt/levy_model.hpp"

#include <initializer_list>

namespace fixtures {

using levyopt::Matrix;
using levyopt::Vector;

inline Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

inline Vector scalar(double x) { return vec({x}); }

inline Matrix mat1(double x) { return Matrix::Constant(1, 1, x); }

/// b = 0.08, c = 0.04: the one-asset Black-Scholes market.
inline levyopt::LevyTriplet merton() { return {scalar(0.08), mat1(0.04)}; }

/// b = 0.1, c = 0, one jump of size 0.5 at unit rate.
inline levyopt::LevyTriplet compound_poisson() {
    levyopt::JumpMeasure j;
    j.atoms.push_back({scalar(0.5), 1.0});
    return {scalar(0.1), mat1(0.0), j};
}

/// Three Brownian assets with kernel (0, 1, 1) and drift e_1.
inline levyopt::LevyTriplet cone_market() {
    Matrix sigma(3, 3);
    sigma << 1, 0, 0, 0, 1, -1, 0, -1, 1;
    return {vec({1.0, 0.0, 0.0}), sigma * sigma.transpose()};
}

/// Jumps filling (-1, -0.5] and an unbounded power tail above 1.
inline levyopt::LevyTriplet dense_near_minus_one() {
    levyopt::JumpMeasure j;
    j.densities.push_back(levyopt::make_uniform(scalar(1.0), -1.0, -0.5, 0.5));
    j.densities.push_back(levyopt::make_pareto(scalar(1.0), 2.5, 0.2, 1.0));
    return {scalar(0.05), mat1(0.04), j};
}

inline levyopt::LevyTriplet duplicated_asset() {
    levyopt::JumpMeasure j;
    j.atoms.push_back({vec({0.3, 0.3}), 0.5});
    j.atoms.push_back({vec({-0.2, -0.2}), 0.5});
    Matrix c(2, 2);
    c << 0.04, 0.04, 0.04, 0.04;
    return {vec({0.08, 0.08}), c, j};
}

/// Pure upward jumps of size 1 at rate 1 with b = 1: no drift after compensation.
inline levyopt::LevyTriplet increasing_jump() {
    levyopt::JumpMeasure j;
    j.atoms.push_back({scalar(1.0), 1.0});
    return {scalar(1.0), mat1(0.0), j};
}

inline levyopt::LevyTriplet pareto(double alpha, double scale = 0.05) {
    levyopt::JumpMeasure j;
    j.densities.push_back(levyopt::make_pareto(scalar(1.0), alpha, scale, 1.0));
    return {scalar(0.05), mat1(0.04), j};
}

/// Downward jumps uniform on [-1, -0.5] with b = 2: the optimum sits at y = 1.
inline levyopt::LevyTriplet boundary_argmax() {
    levyopt::JumpMeasure j;
    j.densities.push_back(levyopt::make_uniform(scalar(1.0), -1.0, -0.5, 1.0));
    return {scalar(2.0), mat1(0.0), j};
}

/// Jump to zero at rate 0.3 plus a small upward jump.
inline levyopt::LevyTriplet negative_jump() {
    levyopt::JumpMeasure j;
    j.atoms.push_back({scalar(-1.0), 0.3});
    j.atoms.push_back({scalar(0.4), 0.5});
    return {scalar(0.2), mat1(0.04), j};
}

/// Two correlated assets with jumps in both, for grid and derivative checks.
inline levyopt::LevyTriplet two_asset_jumps() {
    levyopt::JumpMeasure j;
    j.atoms.push_back({vec({0.3, -0.2}), 0.6});
    j.atoms.push_back({vec({-0.4, 0.1}), 0.4});
    j.densities.push_back(levyopt::make_uniform(vec({0.5, 0.5}), -0.6, 0.8, 0.7));
    Matrix c(2, 2);
    c << 0.04, 0.01, 0.01, 0.09;
    return {vec({0.07, 0.05}), c, j};
}

}  // namespace fixtures

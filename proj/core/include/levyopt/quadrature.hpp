#pragma once

#include "levyopt/levy_model.hpp"

#include <functional>
#include <vector>

namespace levyopt {

struct IntegralResult {
    double value = 0.0;
    double error = 0.0;
    double l1 = 0.0;

    IntegralResult& operator+=(const IntegralResult& other) {
        value += other.value;
        error += other.error;
        l1 += other.l1;
        return *this;
    }
};

struct QuadratureOptions {
    double rel_tol = 1e-9;
    int max_depth = 15;
    int initial_intervals = 4;
};

/// Adaptive integral of fn over [a, b]; either end may be infinite. Pieces adjacent to
/// `singular_points` use a tanh-sinh rule, everything else Gauss-Kronrod (7, 15).
/// Unbounded ends are mapped through r = anchor * e^u so algebraic tails decay exponentially.
IntegralResult integrate(const std::function<double(double)>& fn, double a, double b,
                         const QuadratureOptions& options, const std::vector<double>& singular_points = {});

/// Integral of part(r) * fn(r) over the part's support, split at `breakpoints` (outside points
/// are ignored). `singular_points` are also used as breakpoints.
IntegralResult integrate_part(const DensityPart& part, const std::function<double(double)>& fn,
                              std::vector<double> breakpoints, const std::vector<double>& singular_points,
                              double rel_tol);

/// Point r0 = -1/slope where (1 + slope r) vanishes, when it lies in the support or close enough
/// outside it to spoil plain Gauss-Kronrod; empty otherwise.
std::vector<double> singular_hints(const DensityPart& part, double slope);

/// Breakpoints +-1/|v| where the cutoff h switches off along the part's direction.
std::vector<double> cutoff_breakpoints(const DensityPart& part);

}  // namespace levyopt

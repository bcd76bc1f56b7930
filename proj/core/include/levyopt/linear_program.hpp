#pragma once

#include "levyopt/common.hpp"

namespace levyopt {

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
    LpStatus status = LpStatus::infeasible;
    Vector x;
    double value = 0.0;
};

/// maximize objective . x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x free.
/// Dense two-phase simplex with Bland's rule; intended for the small problems of this library.
LpResult solve_lp(const Vector& objective, const Matrix& A_ub, const Vector& b_ub, const Matrix& A_eq,
                  const Vector& b_eq);

inline LpResult solve_lp(const Vector& objective, const Matrix& A_ub, const Vector& b_ub) {
    return solve_lp(objective, A_ub, b_ub, Matrix(0, objective.size()), Vector(0));
}

}  // namespace levyopt

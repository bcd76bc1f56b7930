#include "levyopt/linear_program.hpp"

#include <vector>

namespace levyopt {

namespace {

constexpr double kPivotTol = 1e-11;

// Tableau in standard form: rows are constraints (basic variable per row), last column is rhs.
class Tableau {
public:
    Tableau(Matrix table, std::vector<int> basis) : t_(std::move(table)), basis_(std::move(basis)) {}

    // Maximizes cost . z over the current tableau; columns >= allowed are never entered.
    // Returns false when unbounded.
    bool optimize(const Vector& cost, int allowed) {
        const int rows = static_cast<int>(t_.rows());
        const int rhs = static_cast<int>(t_.cols()) - 1;
        for (int iter = 0; iter < 50000; ++iter) {
            // reduced costs
            int entering = -1;
            for (int j = 0; j < allowed; ++j) {
                double reduced = cost(j);
                for (int i = 0; i < rows; ++i) reduced -= cost(basis_[i]) * t_(i, j);
                if (reduced > 1e-10) {
                    entering = j;
                    break;
                }
            }
            if (entering < 0) return true;
            int leaving = -1;
            double best = kInf;
            for (int i = 0; i < rows; ++i) {
                const double a = t_(i, entering);
                if (a > kPivotTol) {
                    const double ratio = t_(i, rhs) / a;
                    if (ratio < best - 1e-14 || (ratio <= best + 1e-14 && leaving >= 0 && basis_[i] < basis_[leaving])) {
                        best = ratio;
                        leaving = i;
                    }
                }
            }
            if (leaving < 0) return false;
            pivot(leaving, entering);
        }
        return true;
    }

    void pivot(int row, int col) {
        t_.row(row) /= t_(row, col);
        for (int i = 0; i < t_.rows(); ++i) {
            if (i != row && t_(i, col) != 0.0) t_.row(i) -= t_(i, col) * t_.row(row);
        }
        basis_[row] = col;
    }

    Vector solution(int columns) const {
        Vector z = Vector::Zero(columns);
        const int rhs = static_cast<int>(t_.cols()) - 1;
        for (int i = 0; i < t_.rows(); ++i) {
            if (basis_[i] < columns) z(basis_[i]) = t_(i, rhs);
        }
        return z;
    }

    Matrix& table() { return t_; }
    std::vector<int>& basis() { return basis_; }

private:
    Matrix t_;
    std::vector<int> basis_;
};

}  // namespace

LpResult solve_lp(const Vector& objective, const Matrix& A_ub, const Vector& b_ub, const Matrix& A_eq,
                  const Vector& b_eq) {
    const int n = static_cast<int>(objective.size());
    const int m_ub = static_cast<int>(A_ub.rows());
    const int m_eq = static_cast<int>(A_eq.rows());
    const int m = m_ub + m_eq;

    // Columns: x+ (n), x- (n), slacks (m_ub), artificials (m), rhs.
    const int n_struct = 2 * n + m_ub;
    const int cols = n_struct + m + 1;
    Matrix table = Matrix::Zero(m, cols);
    std::vector<int> basis(m);
    for (int i = 0; i < m; ++i) {
        const bool eq = i >= m_ub;
        const Eigen::RowVectorXd row = eq ? Eigen::RowVectorXd(A_eq.row(i - m_ub)) : Eigen::RowVectorXd(A_ub.row(i));
        double rhs = eq ? b_eq(i - m_ub) : b_ub(i);
        const double sign = rhs < 0.0 ? -1.0 : 1.0;
        table.block(i, 0, 1, n) = sign * row;
        table.block(i, n, 1, n) = -sign * row;
        if (!eq) table(i, 2 * n + i) = sign;
        table(i, n_struct + i) = 1.0;
        table(i, cols - 1) = sign * rhs;
        basis[i] = n_struct + i;
    }

    Tableau tab(std::move(table), std::move(basis));

    // Phase 1: maximize -sum(artificials).
    Vector phase1 = Vector::Zero(cols - 1);
    phase1.tail(m).setConstant(-1.0);
    tab.optimize(phase1, cols - 1);
    double infeasibility = 0.0;
    for (int i = 0; i < m; ++i) {
        if (tab.basis()[i] >= n_struct) infeasibility += tab.table()(i, cols - 1);
    }
    double scale = 1.0;
    if (m_ub > 0) scale = std::max(scale, b_ub.cwiseAbs().maxCoeff());
    if (m_eq > 0) scale = std::max(scale, b_eq.cwiseAbs().maxCoeff());
    if (infeasibility > 1e-9 * scale) return {LpStatus::infeasible, Vector(), 0.0};

    // Drive remaining artificials out of the basis where possible.
    for (int i = 0; i < m; ++i) {
        if (tab.basis()[i] < n_struct) continue;
        for (int j = 0; j < n_struct; ++j) {
            if (std::abs(tab.table()(i, j)) > 1e-9) {
                tab.pivot(i, j);
                break;
            }
        }
    }

    // Phase 2 over structural columns only.
    Vector phase2 = Vector::Zero(cols - 1);
    phase2.head(n) = objective;
    phase2.segment(n, n) = -objective;
    if (!tab.optimize(phase2, n_struct)) return {LpStatus::unbounded, Vector(), kInf};

    const Vector z = tab.solution(n_struct);
    Vector x = z.head(n) - z.segment(n, n);
    return {LpStatus::optimal, x, objective.dot(x)};
}

}  // namespace levyopt

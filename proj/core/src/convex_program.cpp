#include "levyopt/convex_program.hpp"

#include "levyopt/linear_program.hpp"

#include <algorithm>

namespace levyopt {

bool ConvexRegion::contains(const Vector& y, double tol) const {
    ConvexPiece piece{linear, norms, false};
    return piece.contains(y, tol);
}

ConcaveObjective linear_objective(const Vector& c) {
    const Eigen::Index n = c.size();
    return {[c](const Vector& x) { return c.dot(x); }, [c](const Vector&) { return c; },
            [n](const Vector&) { return Matrix(Matrix::Zero(n, n)); }};
}

namespace {

struct Normalized {
    Matrix A;
    Vector b;
};

Normalized normalized_rows(const std::vector<LinearIneq>& rows, Eigen::Index dim) {
    Normalized out{Matrix(static_cast<Eigen::Index>(rows.size()), dim), Vector(static_cast<Eigen::Index>(rows.size()))};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double n = rows[i].a.norm();
        const double scale = n > 0.0 ? 1.0 / n : 1.0;
        out.A.row(static_cast<Eigen::Index>(i)) = scale * rows[i].a.transpose();
        out.b(static_cast<Eigen::Index>(i)) = scale * rows[i].bound;
    }
    return out;
}

// max t s.t. A y + t <= b, t <= 1. Returns (y, t) or nullopt if infeasible.
std::optional<std::pair<Vector, double>> chebyshev_lp(const Normalized& rows, Eigen::Index dim) {
    const Eigen::Index m = rows.A.rows();
    Matrix A = Matrix::Zero(m + 1, dim + 1);
    Vector b(m + 1);
    A.topLeftCorner(m, dim) = rows.A;
    A.block(0, dim, m, 1).setOnes();
    b.head(m) = rows.b;
    A(m, dim) = 1.0;
    b(m) = 1.0;
    Vector obj = Vector::Zero(dim + 1);
    obj(dim) = 1.0;
    const auto res = solve_lp(obj, A, b);
    if (res.status != LpStatus::optimal) return std::nullopt;
    return std::make_pair(Vector(res.x.head(dim)), res.x(dim));
}

struct BarrierTerms {
    const ConvexRegion* region;

    // Barrier value (sum of logs) or nullopt outside the strict interior.
    std::optional<double> value(const Vector& z) const {
        double total = 0.0;
        for (const auto& l : region->linear) {
            const double s = l.bound - l.a.dot(z);
            if (!(s > 0.0)) return std::nullopt;
            total += std::log(s);
        }
        for (const auto& n : region->norms) {
            const double t = n.radius + n.slope.dot(z);
            const Vector w = n.P * z - n.center;
            const double phi = t * t - w.squaredNorm();
            if (!(t > 0.0) || !(phi > 0.0)) return std::nullopt;
            total += std::log(phi);
        }
        return total;
    }

    void derivatives(const Vector& z, Vector& grad, Matrix& hess) const {
        for (const auto& l : region->linear) {
            const double s = l.bound - l.a.dot(z);
            grad -= l.a / s;
            hess -= l.a * l.a.transpose() / (s * s);
        }
        for (const auto& n : region->norms) {
            const double t = n.radius + n.slope.dot(z);
            const Vector w = n.P * z - n.center;
            const double phi = t * t - w.squaredNorm();
            const Vector dphi = 2.0 * t * n.slope - 2.0 * n.P.transpose() * w;
            const Matrix d2phi = 2.0 * n.slope * n.slope.transpose() - 2.0 * n.P.transpose() * n.P;
            grad += dphi / phi;
            hess += d2phi / phi - dphi * dphi.transpose() / (phi * phi);
        }
    }
};

Vector newton_direction(const Matrix& neg_hess, const Vector& grad) {
    Eigen::LDLT<Matrix> ldlt(neg_hess);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
        Vector step = ldlt.solve(grad);
        if (step.allFinite() && grad.dot(step) > 0.0) return step;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(neg_hess);
    Vector vals = eig.eigenvalues();
    const double floor = 1e-12 * std::max(1.0, vals.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < vals.size(); ++i) vals(i) = std::max(vals(i), floor);
    return eig.eigenvectors() * (eig.eigenvectors().transpose() * grad).cwiseQuotient(vals);
}

}  // namespace

AffineReduction reduce_region(const ConvexRegion& region) {
    const Eigen::Index d = region.dim;
    AffineReduction red;

    std::vector<LinearIneq> rows;
    for (const auto& l : region.linear) {
        if (l.a.norm() == 0.0) {
            if (l.bound < 0.0) {
                red.empty = true;
                return red;
            }
            continue;
        }
        rows.push_back(l);
    }
    const Normalized normed = normalized_rows(rows, d);

    Vector y0 = Vector::Zero(d);
    std::vector<bool> implicit(rows.size(), false);
    if (!rows.empty()) {
        const auto cheb = chebyshev_lp(normed, d);
        if (!cheb || cheb->second < -1e-9) {
            red.empty = true;
            return red;
        }
        y0 = cheb->first;
        if (cheb->second <= 1e-9) {
            for (std::size_t i = 0; i < rows.size(); ++i) {
                const auto res = solve_lp(-normed.A.row(static_cast<Eigen::Index>(i)).transpose(), normed.A, normed.b);
                if (res.status == LpStatus::optimal &&
                    normed.b(static_cast<Eigen::Index>(i)) + res.value <= 1e-9) {
                    implicit[i] = true;
                }
            }
        }
    }

    std::vector<Vector> equalities;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (implicit[i]) equalities.push_back(normed.A.row(static_cast<Eigen::Index>(i)).transpose());
    }
    Matrix basis = Matrix::Identity(d, d);
    if (!equalities.empty()) {
        Matrix E(static_cast<Eigen::Index>(equalities.size()), d);
        for (std::size_t i = 0; i < equalities.size(); ++i) E.row(static_cast<Eigen::Index>(i)) = equalities[i].transpose();
        Eigen::JacobiSVD<Matrix> svd(E, Eigen::ComputeFullV);
        Eigen::Index rank = 0;
        const auto& s = svd.singularValues();
        for (Eigen::Index i = 0; i < s.size(); ++i) {
            if (s(i) > 1e-10 * std::max(1.0, s(0))) ++rank;
        }
        basis = svd.matrixV().rightCols(d - rank);
        // Snap the origin onto the equality face.
        Vector rhs(static_cast<Eigen::Index>(equalities.size()));
        Eigen::Index k = 0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (implicit[i]) rhs(k++) = normed.b(static_cast<Eigen::Index>(i));
        }
        y0 = y0 + E.completeOrthogonalDecomposition().solve(rhs - E * y0);
    }
    red.origin = y0;
    red.basis = basis;
    const Eigen::Index k = basis.cols();
    red.reduced.dim = k;

    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (implicit[i]) continue;
        const Vector a = basis.transpose() * rows[i].a;
        const double bound = rows[i].bound - rows[i].a.dot(y0);
        if (a.norm() <= 1e-12 * rows[i].a.norm()) {
            if (bound < -1e-9 * (1.0 + std::abs(rows[i].bound))) {
                red.empty = true;
                return red;
            }
            continue;
        }
        red.reduced.linear.push_back({a, bound});
    }
    for (const auto& n : region.norms) {
        red.reduced.norms.push_back({n.P * basis, n.center - n.P * y0, basis.transpose() * n.slope, n.radius + n.slope.dot(y0)});
    }

    if (k == 0) {
        red.interior = Vector::Zero(0);
        if (!region.contains(y0, 1e-8)) red.empty = true;
        return red;
    }

    Vector z0 = Vector::Zero(k);
    if (!red.reduced.linear.empty()) {
        const auto cheb = chebyshev_lp(normalized_rows(red.reduced.linear, k), k);
        if (!cheb || cheb->second <= 0.0) {
            red.empty = true;
            return red;
        }
        z0 = cheb->first;
    }
    if (red.reduced.norms.empty()) {
        red.interior = z0;
        return red;
    }

    // Phase I on (z, tau): maximize tau with every constraint tightened by tau.
    ConvexRegion phase;
    phase.dim = k + 1;
    double tau0 = 1.0;
    for (const auto& l : red.reduced.linear) {
        const double n = l.a.norm();
        Vector a(k + 1);
        a.head(k) = l.a;
        a(k) = n;
        phase.linear.push_back({a, l.bound});
        tau0 = std::min(tau0, (l.bound - l.a.dot(z0)) / n);
    }
    for (const auto& nq : red.reduced.norms) {
        Matrix P = Matrix::Zero(nq.P.rows(), k + 1);
        P.leftCols(k) = nq.P;
        Vector slope(k + 1);
        slope.head(k) = nq.slope;
        slope(k) = -1.0;
        phase.norms.push_back({P, nq.center, slope, nq.radius});
        tau0 = std::min(tau0, nq.radius + nq.slope.dot(z0) - (nq.P * z0 - nq.center).norm());
    }
    Vector cap = Vector::Zero(k + 1);
    cap(k) = 1.0;
    phase.linear.push_back({cap, 1.0});

    AffineReduction phase_red;
    phase_red.origin = Vector::Zero(k + 1);
    phase_red.basis = Matrix::Identity(k + 1, k + 1);
    phase_red.reduced = phase;
    phase_red.interior = Vector(k + 1);
    phase_red.interior.head(k) = z0;
    phase_red.interior(k) = tau0 - 1.0;

    Vector target = Vector::Zero(k + 1);
    target(k) = 1.0;
    BarrierOptions opts;
    opts.mu_final = 1e-9;
    opts.regularization = 1e-6;
    const auto res = maximize_barrier(linear_objective(target), phase_red, opts);
    if (!(res.x(k) > 1e-10)) {
        red.empty = true;
        return red;
    }
    red.interior = res.x.head(k);
    return red;
}

BarrierResult maximize_barrier(const ConcaveObjective& f, const AffineReduction& reduction,
                               const BarrierOptions& options) {
    const Matrix& B = reduction.basis;
    const Eigen::Index k = B.cols();
    BarrierResult result;
    if (k == 0) {
        result.x = reduction.origin;
        result.value = f.value(result.x);
        result.converged = true;
        return result;
    }
    const BarrierTerms barrier{&reduction.reduced};

    auto merit = [&](const Vector& z, double mu, double eps) -> double {
        const auto logs = barrier.value(z);
        if (!logs) return -kInf;
        const Vector y = reduction.lift(z);
        const double fy = f.value(y);
        if (!std::isfinite(fy)) return -kInf;
        return fy - 0.5 * eps * y.squaredNorm() + mu * *logs;
    };

    Vector z = reduction.interior;
    if (options.start && options.start->size() == reduction.origin.size()) {
        const Vector warm = B.transpose() * (*options.start - reduction.origin);
        if ((reduction.lift(warm) - *options.start).norm() <= 1e-12 * (1.0 + options.start->norm()) &&
            barrier.value(warm)) {
            z = warm;
        }
    }
    double mu = options.mu_start;
    int iterations = 0;
    bool diverged = false;
    while (true) {
        const double eps = options.regularization * mu;
        double current = merit(z, mu, eps);
        if (!std::isfinite(current)) break;
        for (int it = 0; it < options.max_newton; ++it) {
            ++iterations;
            const Vector y = reduction.lift(z);
            Vector grad = B.transpose() * (f.gradient(y) - eps * y);
            Matrix hess = B.transpose() * f.hessian(y) * B - eps * Matrix::Identity(k, k);
            Vector bgrad = Vector::Zero(k);
            Matrix bhess = Matrix::Zero(k, k);
            barrier.derivatives(z, bgrad, bhess);
            grad += mu * bgrad;
            hess += mu * bhess;
            if (!grad.allFinite() || !hess.allFinite()) break;

            const Vector step = newton_direction(-hess, grad);
            const double decrement = grad.dot(step);
            if (!(decrement > 1e-22)) break;

            double alpha = 1.0;
            bool accepted = false;
            while (alpha > 1e-14) {
                const Vector trial = z + alpha * step;
                const double value = merit(trial, mu, eps);
                if (value >= current + 1e-4 * alpha * decrement) {
                    z = trial;
                    current = value;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (!accepted) break;
            if (alpha * step.norm() <= 1e-16 * (1.0 + z.norm())) break;
            if (z.norm() > options.divergence_norm) {
                diverged = true;
                break;
            }
        }
        if (diverged || mu <= options.mu_final) break;
        mu = std::max(mu * options.mu_factor, options.mu_final);
    }
    result.x = reduction.lift(z);
    result.value = f.value(result.x);
    result.iterations = iterations;
    result.converged = !diverged;
    result.final_mu = mu;
    return result;
}

std::optional<BarrierResult> maximize_over(const ConcaveObjective& f, const ConvexRegion& region,
                                           const BarrierOptions& options) {
    const auto red = reduce_region(region);
    if (red.empty) return std::nullopt;
    return maximize_barrier(f, red, options);
}

std::optional<Vector> project_onto_region(const Vector& target, const ConvexRegion& region) {
    const Eigen::Index d = target.size();
    ConcaveObjective f{[target](const Vector& y) { return -0.5 * (y - target).squaredNorm(); },
                       [target](const Vector& y) { return Vector(target - y); },
                       [d](const Vector&) { return Matrix(-Matrix::Identity(d, d)); }};
    BarrierOptions opts;
    opts.regularization = 0.0;
    opts.mu_start = 1e-2 * std::max(1.0, target.squaredNorm());
    const auto res = maximize_over(f, region, opts);
    if (!res) return std::nullopt;
    return res->x;
}

}  // namespace levyopt

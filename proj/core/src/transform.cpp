#include "levyopt/transform.hpp"

#include "levyopt/convex_program.hpp"
#include "levyopt/linear_program.hpp"
#include "levyopt/quadrature.hpp"

#include <algorithm>

namespace levyopt {

namespace {

double radical_inverse(std::size_t index, int base) {
    double result = 0.0;
    double f = 1.0 / base;
    while (index > 0) {
        result += f * static_cast<double>(index % base);
        index /= base;
        f /= base;
    }
    return result;
}

ConvexRegion piece_region(const ConvexPiece& piece, const NaturalConstraints& natural, Eigen::Index d) {
    ConvexRegion region;
    region.dim = d;
    region.linear = piece.linear;
    region.norms = piece.norms;
    for (const auto& h : natural.halfspaces) region.linear.push_back(h);
    for (Eigen::Index j = 0; j < d; ++j) {
        Vector e = Vector::Zero(d);
        e(j) = 1.0;
        region.linear.push_back({e, 1.0});
        region.linear.push_back({-e, 1.0});
    }
    return region;
}

// max of sign * y^i over the region.
std::optional<Vector> extreme_point(const ConvexRegion& region, Eigen::Index i, double sign) {
    Vector obj = Vector::Zero(region.dim);
    obj(i) = sign;
    if (region.norms.empty()) {
        Matrix A(static_cast<Eigen::Index>(region.linear.size()), region.dim);
        Vector b(static_cast<Eigen::Index>(region.linear.size()));
        for (std::size_t r = 0; r < region.linear.size(); ++r) {
            A.row(static_cast<Eigen::Index>(r)) = region.linear[r].a.transpose();
            b(static_cast<Eigen::Index>(r)) = region.linear[r].bound;
        }
        const auto res = solve_lp(obj, A, b);
        if (res.status != LpStatus::optimal) return std::nullopt;
        return res.x;
    }
    BarrierOptions opts;
    opts.regularization = 0.0;
    const auto res = maximize_over(linear_objective(obj), region, opts);
    if (!res) return std::nullopt;
    return res->x;
}

struct Candidate {
    Vector y;
    double score = 0.0;  ///< |y^i|
};

bool better(const Candidate& a, const Candidate& b) {
    if (a.score > b.score + 1e-12) return true;
    if (a.score < b.score - 1e-12) return false;
    return a.y.norm() < b.y.norm() - 1e-12;
}

std::optional<Candidate> piece_candidate(const ConvexPiece& piece, const NaturalConstraints& natural, Eigen::Index d,
                                         Eigen::Index i) {
    const ConvexRegion region = piece_region(piece, natural, d);
    std::optional<Vector> best;
    double best_value = 0.0;
    for (double sign : {1.0, -1.0}) {
        const auto y = extreme_point(region, i, sign);
        if (!y) continue;
        const double v = (*y)(i);
        if (std::abs(v) > std::abs(best_value) + 1e-12) {
            best = y;
            best_value = v;
        }
    }
    if (!best || std::abs(best_value) <= 1e-10) return std::nullopt;

    // Minimal-norm point with the same i-th coordinate.
    ConvexRegion face = region;
    Vector e = Vector::Zero(d);
    e(i) = 1.0;
    face.linear.push_back({e, best_value});
    face.linear.push_back({-e, -best_value});
    Vector y = *best;
    if (const auto proj = project_onto_region(Vector::Zero(d), face)) y = *proj;
    y(i) = best_value;
    Vector snapped = y;
    for (Eigen::Index j = 0; j < d; ++j) {
        if (std::abs(snapped(j)) < 1e-9) snapped(j) = 0.0;
    }
    if (region.contains(snapped, 1e-12)) y = snapped;

    if (!natural.contains_strict(y)) {
        if (piece.contains(Vector::Zero(d), 1e-12)) {
            y *= 0.5;
        } else {
            const auto red = reduce_region(region);
            if (red.empty) return std::nullopt;
            y = 0.5 * (y + red.lift(red.interior));
        }
    }
    if (!natural.contains_strict(y) || std::abs(y(i)) <= 1e-12) return std::nullopt;
    return Candidate{y, std::abs(y(i))};
}

std::optional<Candidate> oracle_candidate(const StarOracle& oracle, const NaturalConstraints& natural, Eigen::Index d,
                                          Eigen::Index i) {
    static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    std::optional<Candidate> best;
    const std::size_t samples = 256 * static_cast<std::size_t>(d);
    for (std::size_t s = 1; s <= samples; ++s) {
        Vector u(d);
        for (Eigen::Index j = 0; j < d; ++j) u(j) = 2.0 * radical_inverse(s, primes[j % 12]) - 1.0;
        if (u.norm() == 0.0) continue;
        u.normalize();
        double t = std::min(oracle.radial_bound(u), natural.radial_extent(u));
        t = std::min(t, 1.0 / u.cwiseAbs().maxCoeff());
        if (!(t > 0.0)) continue;
        const Vector y = 0.5 * t * u;
        if (!oracle.contains(y) || !natural.contains_strict(y)) continue;
        Candidate cand{y, std::abs(y(i))};
        if (cand.score > 1e-12 && (!best || better(cand, *best))) best = cand;
    }
    return best;
}

}  // namespace

LevyTriplet transform_triplet(const LevyTriplet& triplet, const Matrix& Lambda, const Tolerances& tol) {
    const Eigen::Index d = triplet.dim();
    if (Lambda.rows() != d || Lambda.cols() != d) throw DomainError("transform matrix must be d x d");
    Vector b = Lambda * triplet.b;
    JumpMeasure jumps;
    for (const auto& atom : triplet.jumps.atoms) {
        const Vector image = Lambda * atom.x;
        b += atom.lambda * (cutoff(image) - Lambda * cutoff(atom.x));
        if (image.norm() > 1e-15 * atom.x.norm()) jumps.atoms.push_back({image, atom.lambda});
    }
    for (const auto& part : triplet.jumps.densities) {
        const Vector image = Lambda * part.direction;
        const double old_norm = part.direction.norm();
        const double new_norm = image.norm();
        if (new_norm <= 1e-15 * old_norm) continue;
        auto shift = [old_norm, new_norm](double r) {
            return cutoff_factor(r, new_norm) - cutoff_factor(r, old_norm);
        };
        std::vector<double> breaks = cutoff_breakpoints(part);
        breaks.push_back(-1.0 / new_norm);
        breaks.push_back(1.0 / new_norm);
        const auto res = integrate_part(part, shift, breaks, {}, tol.quadrature);
        b += res.value * image;
        DensityPart mapped = part;
        mapped.direction = image;
        jumps.densities.push_back(std::move(mapped));
    }
    Matrix c = Lambda * triplet.c * Lambda.transpose();
    c = 0.5 * (c + c.transpose());
    return LevyTriplet(b, c, std::move(jumps));
}

ModelTransform build_transform(const LevyTriplet& triplet, const ConstraintSet& C, const Tolerances& tol) {
    const Eigen::Index d = triplet.dim();
    if (C.dim() != d) throw DomainError("constraint dimension differs from the model");
    ModelTransform out;
    out.Lambda = Matrix::Identity(d, d);
    LevyTriplet current = triplet;
    ConstraintSet current_C = C;

    for (Eigen::Index i = 0; i < d; ++i) {
        const NaturalConstraints natural = natural_constraints(current);
        std::optional<Candidate> best;
        if (current_C.is_oracle()) {
            best = oracle_candidate(*current_C.star_oracle(), natural, d, i);
        } else {
            for (const auto& piece : current_C.pieces()) {
                const auto cand = piece_candidate(piece, natural, d, i);
                if (cand && (!best || better(*cand, *best))) best = cand;
            }
        }
        Vector y = Vector::Zero(d);
        if (best) {
            y = best->y;
        } else {
            out.notes.push_back("component " + std::to_string(i) + " treated as untradable" +
                                (current_C.is_oracle() ? " (no sampled candidate)" : ""));
        }
        out.steps.push_back(y);
        Matrix step = Matrix::Identity(d, d);
        step.row(i) = y.transpose();
        current = transform_triplet(current, step, tol);
        current_C = current_C.preimage(step);
        out.Lambda = step * out.Lambda;
    }

    out.pinv_Lambda_T = out.Lambda.transpose().completeOrthogonalDecomposition().pseudoInverse();
    out.triplet = current;
    // Rebuild the preimage in one go to avoid accumulating per-step factors.
    out.constraints = C.preimage(out.Lambda);

    const bool invertible = Eigen::FullPivLU<Matrix>(out.Lambda).rank() == d;
    if (C.compact() && !invertible) {
        double extent = 0.0;
        if (C.is_oracle()) {
            for (Eigen::Index j = 0; j < d; ++j) {
                Vector e = Vector::Zero(d);
                e(j) = 1.0;
                extent = std::max({extent, C.star_oracle()->radial_bound(e), C.star_oracle()->radial_bound(-e)});
            }
            extent *= std::sqrt(static_cast<double>(d));
        } else {
            for (const auto& piece : C.pieces()) {
                ConvexRegion region{d, piece.linear, piece.norms};
                double sq = 0.0;
                for (Eigen::Index j = 0; j < d; ++j) {
                    double m = 0.0;
                    for (double sign : {1.0, -1.0}) {
                        if (const auto y = extreme_point(region, j, sign)) m = std::max(m, std::abs((*y)(j)));
                    }
                    sq += m * m;
                }
                extent = std::max(extent, std::sqrt(sq));
            }
        }
        const double pinv_norm = Eigen::JacobiSVD<Matrix>(out.pinv_Lambda_T).singularValues()(0);
        const double radius = std::max(1.0, 2.0 * pinv_norm * extent);
        out.constraints = out.constraints.intersect_ball(radius);
        out.notes.push_back("transformed constraints intersected with a ball of radius " + std::to_string(radius));
    }
    return out;
}

Vector map_portfolio_back(const Vector& z, const ModelTransform& transform) {
    if (z.size() != transform.Lambda.rows()) throw DomainError("portfolio dimension differs from the transform");
    if (!transform.constraints.contains(z, 1e-9)) throw DomainError("portfolio outside the transformed constraints");
    return transform.Lambda.transpose() * z;
}

}  // namespace levyopt

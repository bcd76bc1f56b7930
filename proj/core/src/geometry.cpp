#include "levyopt/geometry.hpp"

#include "levyopt/linear_program.hpp"

#include <algorithm>

namespace levyopt {

bool NaturalConstraints::contains(const Vector& y, double tol) const {
    for (const auto& h : halfspaces) {
        if (h.a.dot(y) > h.bound + tol * (1.0 + h.a.cwiseAbs().dot(y.cwiseAbs()))) return false;
    }
    return true;
}

bool NaturalConstraints::contains_strict(const Vector& y, double tol) const {
    if (!contains(y, tol)) return false;
    for (const auto& x : atoms) {
        if (1.0 + x.dot(y) <= tol) return false;
    }
    return true;
}

double NaturalConstraints::radial_extent(const Vector& u) const {
    double t = kInf;
    for (const auto& h : halfspaces) {
        const double rate = h.a.dot(u);
        if (rate > 0.0) t = std::min(t, h.bound / rate);
    }
    return std::max(t, 0.0);
}

NaturalConstraints natural_constraints(const LevyTriplet& triplet) {
    NaturalConstraints out;
    out.dim = triplet.dim();
    auto add = [&](const Vector& a, double bound) {
        for (const auto& h : out.halfspaces) {
            if ((h.a - a).norm() <= 1e-14 * (1.0 + a.norm()) && h.bound == bound) return;
        }
        out.halfspaces.push_back({a, bound});
    };
    for (const auto& atom : triplet.jumps.atoms) {
        add(-atom.x, 1.0);
        out.atoms.push_back(atom.x);
    }
    for (const auto& part : triplet.jumps.densities) {
        const Vector& v = part.direction;
        if (std::isfinite(part.lo)) add(-part.lo * v, 1.0);
        else add(v, 0.0);
        if (std::isfinite(part.hi)) add(-part.hi * v, 1.0);
        else add(-v, 0.0);
    }
    return out;
}

Matrix null_space(const LevyTriplet& triplet, double tol) {
    const Eigen::Index d = triplet.dim();
    std::vector<Vector> rows;
    rows.push_back(triplet.b);
    for (Eigen::Index i = 0; i < d; ++i) rows.push_back(triplet.c.row(i).transpose());
    for (const auto& atom : triplet.jumps.atoms) rows.push_back(atom.x);
    for (const auto& part : triplet.jumps.densities) rows.push_back(part.direction);

    Matrix M(static_cast<Eigen::Index>(rows.size()), d);
    for (std::size_t i = 0; i < rows.size(); ++i) M.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double smax = s.size() ? s(0) : 0.0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > tol * std::max(1.0, smax)) ++rank;
    }
    Matrix basis = svd.matrixV().rightCols(d - rank);
    // Deterministic orientation: first nonzero entry positive.
    for (Eigen::Index j = 0; j < basis.cols(); ++j) {
        for (Eigen::Index i = 0; i < d; ++i) {
            if (std::abs(basis(i, j)) > 1e-12) {
                if (basis(i, j) < 0.0) basis.col(j) *= -1.0;
                break;
            }
        }
    }
    return basis;
}

Vector project_onto_N_perp(const Vector& y, const Matrix& null_basis) {
    if (null_basis.cols() == 0) return y;
    return y - null_basis * (null_basis.transpose() * y);
}

std::string to_string(Closedness c) {
    switch (c) {
        case Closedness::yes: return "true";
        case Closedness::no: return "false";
        case Closedness::unknown: return "unknown";
    }
    return "unknown";
}

std::string to_string(NuipStatus s) {
    switch (s) {
        case NuipStatus::holds: return "holds";
        case NuipStatus::violated: return "violated";
        case NuipStatus::undecidable: return "undecidable";
    }
    return "undecidable";
}

bool invariant_under_null_space(const ConstraintSet& C, const Matrix& null_basis, double tol) {
    if (null_basis.cols() == 0) return true;
    if (C.is_oracle()) return false;
    if (C.pieces().size() != 1) return false;
    const auto& piece = C.pieces().front();
    for (Eigen::Index j = 0; j < null_basis.cols(); ++j) {
        const Vector n = null_basis.col(j);
        for (const auto& l : piece.linear) {
            if (std::abs(l.a.dot(n)) > tol * (1.0 + l.a.norm())) return false;
        }
        for (const auto& q : piece.norms) {
            if ((q.P * n).norm() > tol || std::abs(q.slope.dot(n)) > tol) return false;
        }
    }
    return true;
}

Closedness projection_closedness(const ConstraintSet& C, const Matrix& null_basis) {
    if (C.unconstrained_set()) return Closedness::yes;
    if (C.is_oracle()) return C.compact() ? Closedness::yes : Closedness::unknown;
    if (C.polyhedral() || C.compact()) return Closedness::yes;
    if (null_basis.cols() == 0) return Closedness::yes;
    if (C.convex() && invariant_under_null_space(C, null_basis)) return Closedness::yes;
    return Closedness::unknown;
}

bool JMembership::member(double tol) const {
    return c_residual <= tol && min_jump_gain >= -tol && net_drift >= -tol && null_distance > tol;
}

JMembership j_membership(const LevyTriplet& triplet, const Vector& y, const Tolerances& tol) {
    JMembership out;
    out.c_residual = (triplet.c * y).norm();
    double gain = kInf;
    for (const auto& atom : triplet.jumps.atoms) gain = std::min(gain, y.dot(atom.x));
    for (const auto& part : triplet.jumps.densities) {
        const double s = y.dot(part.direction);
        if (s == 0.0) {
            gain = std::min(gain, 0.0);
            continue;
        }
        const double end = s > 0.0 ? part.lo : part.hi;
        gain = std::min(gain, std::isfinite(end) ? end * s : -kInf);
    }
    out.min_jump_gain = gain;
    out.net_drift = y.dot(triplet.b) - y.dot(compensator_mean(triplet, tol));
    const Matrix N = null_space(triplet, tol.geometry);
    out.null_distance = project_onto_N_perp(y, N).norm();
    return out;
}

namespace {

struct NuipLp {
    std::vector<LinearIneq> ub;
    std::vector<LinearIneq> eq;
    Vector objective;
};

// The linear part of the search over the recession cone of C intersected with the J conditions.
NuipLp base_nuip_lp(const LevyTriplet& triplet, const Tolerances& tol) {
    const Eigen::Index d = triplet.dim();
    NuipLp lp;
    lp.objective = Vector::Zero(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        if (triplet.c.row(i).norm() > 0.0) lp.eq.push_back({triplet.c.row(i).transpose(), 0.0});
        Vector e = Vector::Zero(d);
        e(i) = 1.0;
        lp.ub.push_back({e, 1.0});
        lp.ub.push_back({-e, 1.0});
    }
    for (const auto& atom : triplet.jumps.atoms) {
        lp.ub.push_back({-atom.x, 0.0});
        lp.objective += atom.x;
    }
    for (const auto& part : triplet.jumps.densities) {
        const Vector& v = part.direction;
        if (part.lo < 0.0 && part.hi > 0.0) {
            lp.eq.push_back({v, 0.0});
        } else if (part.lo >= 0.0) {
            lp.ub.push_back({-v, 0.0});
            lp.objective += v;
        } else {
            lp.ub.push_back({v, 0.0});
            lp.objective -= v;
        }
    }
    const Vector net = triplet.b - compensator_mean(triplet, tol);
    lp.ub.push_back({-net, 0.0});
    lp.objective += net;
    return lp;
}

LpResult run_lp(const NuipLp& lp, Eigen::Index d) {
    Matrix A(static_cast<Eigen::Index>(lp.ub.size()), d);
    Vector bu(static_cast<Eigen::Index>(lp.ub.size()));
    for (std::size_t i = 0; i < lp.ub.size(); ++i) {
        A.row(static_cast<Eigen::Index>(i)) = lp.ub[i].a.transpose();
        bu(static_cast<Eigen::Index>(i)) = lp.ub[i].bound;
    }
    Matrix E(static_cast<Eigen::Index>(lp.eq.size()), d);
    Vector be(static_cast<Eigen::Index>(lp.eq.size()));
    for (std::size_t i = 0; i < lp.eq.size(); ++i) {
        E.row(static_cast<Eigen::Index>(i)) = lp.eq[i].a.transpose();
        be(static_cast<Eigen::Index>(i)) = lp.eq[i].bound;
    }
    return solve_lp(lp.objective, A, bu, E, be);
}

// Searches the recession cone of one convex piece; cutting planes outer-approximate second-order cones.
NuipVerdict nuip_piece(const LevyTriplet& triplet, const ConvexPiece& piece, const NuipLp& base, double tol) {
    const Eigen::Index d = triplet.dim();
    NuipLp lp = base;
    std::vector<const NormIneq*> cones;
    for (const auto& l : piece.linear) lp.ub.push_back({l.a, 0.0});
    for (const auto& n : piece.norms) {
        if (n.slope.norm() == 0.0) {
            for (Eigen::Index i = 0; i < n.P.rows(); ++i) lp.eq.push_back({n.P.row(i).transpose(), 0.0});
        } else {
            lp.ub.push_back({-n.slope, 0.0});
            cones.push_back(&n);
        }
    }
    NuipVerdict verdict;
    for (int round = 0; round < 400; ++round) {
        const auto res = run_lp(lp, d);
        if (res.status != LpStatus::optimal || res.value <= tol) {
            verdict.status = NuipStatus::holds;
            return verdict;
        }
        const Vector& y = res.x;
        bool feasible = true;
        for (const auto* n : cones) {
            const Vector Py = n->P * y;
            const double norm = Py.norm();
            if (norm > n->slope.dot(y) + tol) {
                feasible = false;
                lp.ub.push_back({n->P.transpose() * (Py / norm) - n->slope, 0.0});
            }
        }
        if (feasible) {
            verdict.status = NuipStatus::violated;
            verdict.witness = y.normalized();
            for (Eigen::Index i = 0; i < d; ++i) {
                if (std::abs(verdict.witness(i)) < 1e-15) verdict.witness(i) = 0.0;
            }
            verdict.reason = "increasing profit direction in the recession cone";
            return verdict;
        }
    }
    verdict.status = NuipStatus::undecidable;
    verdict.reason = "cutting planes did not converge on a second-order recession cone";
    return verdict;
}

}  // namespace

NuipVerdict nuip_check(const LevyTriplet& triplet, const ConstraintSet& C, const Tolerances& tol) {
    const NuipLp base = base_nuip_lp(triplet, tol);
    const double lp_tol = 1e-9;

    if (C.is_oracle()) {
        if (C.compact()) return {NuipStatus::holds, Vector(), "compact constraint set"};
        const auto free = nuip_piece(triplet, ConvexPiece{}, base, lp_tol);
        if (free.status == NuipStatus::holds) return {NuipStatus::holds, Vector(), "holds without constraints"};
        return {NuipStatus::undecidable, Vector(), "star-shaped oracle with unknown recession cone"};
    }

    NuipVerdict result{NuipStatus::holds, Vector(), "no increasing profit direction"};
    for (const auto& piece : C.pieces()) {
        if (piece_recession_trivial(piece, C.dim())) continue;
        auto verdict = nuip_piece(triplet, piece, base, lp_tol);
        if (verdict.status == NuipStatus::violated) return verdict;
        if (verdict.status == NuipStatus::undecidable) result = verdict;
    }
    if (C.compact()) result.reason = "compact constraint set";
    return result;
}

std::vector<Vector> recession_rays(const ConvexPiece& piece, const NaturalConstraints& natural, double tol) {
    const Eigen::Index d = natural.dim;
    std::vector<Vector> rows;
    for (const auto& l : piece.linear) rows.push_back(l.a);
    for (const auto& h : natural.halfspaces) rows.push_back(h.a);
    if (!piece.norms.empty() && piece_recession_trivial(piece, d)) return {};

    auto feasible = [&](const Vector& y) {
        for (const auto& a : rows) {
            if (a.dot(y) > tol) return false;
        }
        for (const auto& n : piece.norms) {
            if ((n.P * y).norm() > n.slope.dot(y) + tol) return false;
        }
        return true;
    };

    std::vector<Vector> candidates;
    for (Eigen::Index i = 0; i < d; ++i) {
        Vector e = Vector::Zero(d);
        e(i) = 1.0;
        candidates.push_back(e);
    }
    const int m = static_cast<int>(rows.size());
    if (d >= 2 && m >= d - 1) {
        std::vector<int> idx(d - 1);
        for (Eigen::Index i = 0; i < d - 1; ++i) idx[i] = static_cast<int>(i);
        while (true) {
            Matrix sub(d - 1, d);
            for (Eigen::Index r = 0; r < d - 1; ++r) sub.row(r) = rows[idx[r]].transpose();
            Eigen::FullPivLU<Matrix> lu(sub);
            if (lu.rank() == d - 1) candidates.push_back(lu.kernel().col(0).normalized());
            int i = static_cast<int>(d) - 2;
            while (i >= 0 && idx[i] == m - (static_cast<int>(d) - 1) + i) --i;
            if (i < 0) break;
            ++idx[i];
            for (int j = i + 1; j < d - 1; ++j) idx[j] = idx[j - 1] + 1;
        }
    }
    std::vector<Vector> rays;
    for (const auto& cand : candidates) {
        for (double sign : {1.0, -1.0}) {
            const Vector y = sign * cand;
            if (!feasible(y)) continue;
            bool seen = false;
            for (const auto& r : rays) seen = seen || (r - y).norm() < 1e-9;
            if (!seen) rays.push_back(y);
        }
    }
    return rays;
}

ConstraintGeometry analyze_geometry(const LevyTriplet& triplet, const ConstraintSet& C, const Tolerances& tol) {
    ConstraintGeometry geo;
    geo.natural = natural_constraints(triplet);
    geo.null_basis = null_space(triplet, tol.geometry);
    if (!C.is_oracle() && C.polyhedral()) {
        for (const auto& piece : C.pieces()) {
            for (auto& ray : recession_rays(piece, geo.natural, tol.geometry)) geo.recession_rays.push_back(ray);
        }
    }
    geo.nuip = nuip_check(triplet, C, tol);
    geo.projection_closed = projection_closedness(C, geo.null_basis);
    return geo;
}

}  // namespace levyopt

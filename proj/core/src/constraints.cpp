#include "levyopt/constraints.hpp"

#include "levyopt/linear_program.hpp"

#include <algorithm>
#include <sstream>

namespace levyopt {

namespace {

bool norm_ineq_holds(const NormIneq& n, const Vector& y, double tol) {
    const double lhs = (n.P * y - n.center).norm();
    const double rhs = n.radius + n.slope.dot(y);
    return lhs <= rhs + tol * (1.0 + std::abs(rhs) + lhs);
}

bool linear_holds(const LinearIneq& l, const Vector& y, double tol) {
    return l.a.dot(y) <= l.bound + tol * (1.0 + std::abs(l.bound) + l.a.cwiseAbs().dot(y.cwiseAbs()));
}

// All k-subsets of {0..n-1}, lexicographic.
void for_each_subset(int n, int k, const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    while (true) {
        fn(idx);
        int i = k - 1;
        while (i >= 0 && idx[i] == n - k + i) --i;
        if (i < 0) return;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

}  // namespace

std::string to_string(ConstraintKind kind) {
    switch (kind) {
        case ConstraintKind::none: return "none";
        case ConstraintKind::polyhedron: return "polyhedron";
        case ConstraintKind::box: return "box";
        case ConstraintKind::ball: return "ball";
        case ConstraintKind::hull: return "hull";
        case ConstraintKind::cone: return "cone";
        case ConstraintKind::union_of: return "union";
        case ConstraintKind::oracle: return "oracle";
    }
    return "unknown";
}

bool ConvexPiece::contains(const Vector& y, double tol) const {
    for (const auto& l : linear) {
        if (!linear_holds(l, y, tol)) return false;
    }
    for (const auto& n : norms) {
        if (!norm_ineq_holds(n, y, tol)) return false;
    }
    return true;
}

bool piece_recession_trivial(const ConvexPiece& piece, Eigen::Index dim) {
    if (piece.bounded) return true;
    // A ball-type norm constraint with injective P already bounds the piece.
    for (const auto& n : piece.norms) {
        if (n.slope.norm() == 0.0) {
            Eigen::FullPivLU<Matrix> lu(n.P);
            lu.setThreshold(1e-12);
            if (lu.rank() == dim) return true;
        }
    }
    // Linear recession cone intersected with the unit box: any nonzero direction?
    std::vector<LinearIneq> rows;
    for (const auto& l : piece.linear) rows.push_back({l.a, 0.0});
    for (const auto& n : piece.norms) {
        if (n.slope.norm() == 0.0) {
            for (Eigen::Index i = 0; i < n.P.rows(); ++i) {
                rows.push_back({n.P.row(i).transpose(), 0.0});
                rows.push_back({-n.P.row(i).transpose(), 0.0});
            }
        } else {
            // |P y| <= slope . y implies slope . y >= 0; a relaxation, so "trivial" stays sound.
            rows.push_back({-n.slope, 0.0});
        }
    }
    const Eigen::Index m = static_cast<Eigen::Index>(rows.size());
    Matrix A(m + 2 * dim, dim);
    Vector ub(m + 2 * dim);
    for (Eigen::Index i = 0; i < m; ++i) {
        A.row(i) = rows[i].a.transpose();
        ub(i) = 0.0;
    }
    A.block(m, 0, dim, dim) = Matrix::Identity(dim, dim);
    A.block(m + dim, 0, dim, dim) = -Matrix::Identity(dim, dim);
    ub.segment(m, 2 * dim).setOnes();
    for (Eigen::Index j = 0; j < dim; ++j) {
        for (double sign : {1.0, -1.0}) {
            Vector obj = Vector::Zero(dim);
            obj(j) = sign;
            const auto res = solve_lp(obj, A, ub);
            if (res.status == LpStatus::optimal && res.value > 1e-9) return false;
        }
    }
    return true;
}

std::vector<LinearIneq> hull_facets(const std::vector<Vector>& points, double tol) {
    if (points.empty()) throw DomainError("hull of no points");
    const Eigen::Index d = points.front().size();
    Matrix M(d, static_cast<Eigen::Index>(points.size()));
    for (std::size_t i = 0; i < points.size(); ++i) M.col(static_cast<Eigen::Index>(i)) = points[i];

    // The hull contains 0, so its affine hull is the linear span of the points.
    Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullU);
    const double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
        if (svd.singularValues()(i) > tol * std::max(1.0, smax)) ++k;
    }
    const Matrix basis = svd.matrixU().leftCols(k);
    std::vector<LinearIneq> out;
    for (Eigen::Index i = k; i < d; ++i) {
        const Vector u = svd.matrixU().col(i);
        out.push_back({u, 0.0});
        out.push_back({-u, 0.0});
    }
    if (k == 0) return out;

    const int n = static_cast<int>(points.size());
    std::vector<Vector> coords;
    for (const auto& p : points) coords.push_back(basis.transpose() * p);

    std::vector<LinearIneq> facets;
    for_each_subset(n, static_cast<int>(k), [&](const std::vector<int>& idx) {
        Vector normal;
        if (k == 1) {
            normal = Vector::Ones(1);
        } else {
            Matrix diffs(k - 1, k);
            for (Eigen::Index r = 1; r < k; ++r) diffs.row(r - 1) = (coords[idx[r]] - coords[idx[0]]).transpose();
            Eigen::FullPivLU<Matrix> lu(diffs);
            if (lu.rank() != k - 1) return;
            normal = lu.kernel().col(0).normalized();
        }
        const double offset = normal.dot(coords[idx[0]]);
        bool all_below = true;
        bool all_above = true;
        for (const auto& c : coords) {
            const double s = normal.dot(c) - offset;
            if (s > tol) all_below = false;
            if (s < -tol) all_above = false;
        }
        if (!all_below && !all_above) return;
        LinearIneq facet{all_below ? normal : Vector(-normal), all_below ? offset : -offset};
        for (const auto& f : facets) {
            if ((f.a - facet.a).norm() < 1e-9 && std::abs(f.bound - facet.bound) < 1e-9) return;
        }
        facets.push_back(facet);
    });
    for (const auto& f : facets) out.push_back({basis * f.a, f.bound});
    return out;
}

ConstraintSet ConstraintSet::unconstrained(Eigen::Index dim) {
    ConstraintSet set(dim, ConstraintKind::none);
    set.pieces_.push_back(ConvexPiece{});
    return set;
}

ConstraintSet ConstraintSet::polyhedron(const Matrix& A, const Vector& upper, OriginCheck check) {
    if (A.rows() != upper.size()) throw DomainError("polyhedron: row count of A differs from bound length");
    ConstraintSet set(A.cols(), ConstraintKind::polyhedron);
    ConvexPiece piece;
    for (Eigen::Index i = 0; i < A.rows(); ++i) piece.linear.push_back({A.row(i).transpose(), upper(i)});
    piece.bounded = piece_recession_trivial(piece, A.cols());
    set.pieces_.push_back(std::move(piece));
    if (check == OriginCheck::require) set.require_origin();
    return set;
}

ConstraintSet ConstraintSet::box(const Vector& lower, const Vector& upper, OriginCheck check) {
    if (lower.size() != upper.size()) throw DomainError("box: bound lengths differ");
    const Eigen::Index d = lower.size();
    ConstraintSet set(d, ConstraintKind::box);
    ConvexPiece piece;
    bool bounded = true;
    for (Eigen::Index i = 0; i < d; ++i) {
        if (lower(i) > upper(i)) throw DomainError("box: lower bound above upper bound");
        Vector e = Vector::Zero(d);
        e(i) = 1.0;
        if (std::isfinite(upper(i))) piece.linear.push_back({e, upper(i)});
        else bounded = false;
        if (std::isfinite(lower(i))) piece.linear.push_back({-e, -lower(i)});
        else bounded = false;
    }
    piece.bounded = bounded;
    set.pieces_.push_back(std::move(piece));
    if (check == OriginCheck::require) set.require_origin();
    return set;
}

ConstraintSet ConstraintSet::ball(const Vector& center, double radius, OriginCheck check) {
    if (!(radius >= 0.0)) throw DomainError("ball: negative radius");
    const Eigen::Index d = center.size();
    ConstraintSet set(d, ConstraintKind::ball);
    ConvexPiece piece;
    if (radius == 0.0) {
        for (Eigen::Index i = 0; i < d; ++i) {
            Vector e = Vector::Zero(d);
            e(i) = 1.0;
            piece.linear.push_back({e, center(i)});
            piece.linear.push_back({-e, -center(i)});
        }
    } else {
        piece.norms.push_back({Matrix::Identity(d, d), center, Vector::Zero(d), radius});
    }
    piece.bounded = true;
    set.pieces_.push_back(std::move(piece));
    if (check == OriginCheck::require) set.require_origin();
    return set;
}

ConstraintSet ConstraintSet::hull(const std::vector<Vector>& points, OriginCheck check) {
    if (points.empty()) throw DomainError("hull: no points");
    ConstraintSet set(points.front().size(), ConstraintKind::hull);
    ConvexPiece piece;
    piece.linear = hull_facets(points);
    piece.bounded = true;
    set.pieces_.push_back(std::move(piece));
    if (check == OriginCheck::require) set.require_origin();
    return set;
}

ConstraintSet ConstraintSet::cone(const Matrix& P, const Vector& slope) {
    if (P.cols() != slope.size()) throw DomainError("cone: column count of P differs from slope length");
    ConstraintSet set(slope.size(), ConstraintKind::cone);
    ConvexPiece piece;
    piece.norms.push_back({P, Vector::Zero(P.rows()), slope, 0.0});
    piece.bounded = false;
    set.pieces_.push_back(std::move(piece));
    return set;
}

ConstraintSet ConstraintSet::union_of(const std::vector<ConstraintSet>& parts) {
    if (parts.empty()) throw DomainError("union: no pieces");
    ConstraintSet set(parts.front().dim(), ConstraintKind::union_of);
    for (const auto& part : parts) {
        if (part.dim() != set.dim_) throw DomainError("union: pieces of different dimension");
        if (part.is_oracle()) throw DomainError("union: oracle pieces are not supported");
        for (const auto& piece : part.pieces_) set.pieces_.push_back(piece);
    }
    set.require_origin();
    return set;
}

ConstraintSet ConstraintSet::oracle(Eigen::Index dim, StarOracle oracle) {
    if (!oracle.contains || !oracle.radial_bound) throw DomainError("oracle: membership and radial bound required");
    ConstraintSet set(dim, ConstraintKind::oracle);
    set.oracle_ = std::move(oracle);
    set.require_origin();
    return set;
}

ConstraintSet ConstraintSet::from_pieces(Eigen::Index dim, std::vector<ConvexPiece> pieces, ConstraintKind kind) {
    ConstraintSet set(dim, kind);
    set.pieces_ = std::move(pieces);
    return set;
}

void ConstraintSet::require_origin() const {
    if (!contains(Vector::Zero(dim_), 1e-12)) throw DomainError("constraint set must contain the origin");
}

bool ConstraintSet::contains(const Vector& y, double tol) const {
    if (oracle_) return oracle_->contains(y);
    return std::any_of(pieces_.begin(), pieces_.end(), [&](const ConvexPiece& p) { return p.contains(y, tol); });
}

bool ConstraintSet::polyhedral() const {
    if (oracle_) return false;
    return std::all_of(pieces_.begin(), pieces_.end(), [](const ConvexPiece& p) { return p.polyhedral(); });
}

bool ConstraintSet::compact() const {
    if (oracle_) return oracle_->bounded;
    return std::all_of(pieces_.begin(), pieces_.end(),
                       [&](const ConvexPiece& p) { return piece_recession_trivial(p, dim_); });
}

bool ConstraintSet::star_shaped() const {
    if (oracle_) return true;
    const Vector zero = Vector::Zero(dim_);
    return std::all_of(pieces_.begin(), pieces_.end(), [&](const ConvexPiece& p) { return p.contains(zero, 1e-12); });
}

bool ConstraintSet::unconstrained_set() const {
    return !oracle_ && pieces_.size() == 1 && pieces_.front().linear.empty() && pieces_.front().norms.empty();
}

ConstraintSet ConstraintSet::preimage(const Matrix& L) const {
    ConstraintSet out(L.rows(), kind_);
    if (oracle_) {
        StarOracle mapped = *oracle_;
        const Matrix Lt = L.transpose();
        auto inner = oracle_->contains;
        mapped.contains = [inner, Lt](const Vector& z) { return inner(Lt * z); };
        auto radial = oracle_->radial_bound;
        mapped.radial_bound = [radial, Lt](const Vector& u) {
            const Vector image = Lt * u;
            const double n = image.norm();
            if (n == 0.0) return kInf;
            return radial(image / n) / n;
        };
        mapped.bounded = oracle_->bounded && Eigen::FullPivLU<Matrix>(L).rank() == L.rows();
        out.oracle_ = std::move(mapped);
        return out;
    }
    for (const auto& piece : pieces_) {
        ConvexPiece mapped;
        for (const auto& l : piece.linear) mapped.linear.push_back({L * l.a, l.bound});
        for (const auto& n : piece.norms) {
            mapped.norms.push_back({n.P * L.transpose(), n.center, L * n.slope, n.radius});
        }
        mapped.bounded = piece.bounded && Eigen::FullPivLU<Matrix>(L).rank() == L.rows();
        out.pieces_.push_back(std::move(mapped));
    }
    return out;
}

ConstraintSet ConstraintSet::intersect_ball(double radius) const {
    ConstraintSet out = *this;
    if (oracle_) {
        auto inner = oracle_->contains;
        auto radial = oracle_->radial_bound;
        out.oracle_->contains = [inner, radius](const Vector& y) { return y.norm() <= radius && inner(y); };
        out.oracle_->radial_bound = [radial, radius](const Vector& u) { return std::min(radius, radial(u)); };
        out.oracle_->bounded = true;
        return out;
    }
    for (auto& piece : out.pieces_) {
        piece.norms.push_back({Matrix::Identity(dim_, dim_), Vector::Zero(dim_), Vector::Zero(dim_), radius});
        piece.bounded = true;
    }
    return out;
}

ConstraintSet ConstraintSet::piece_set(std::size_t i) const {
    ConstraintKind kind = kind_;
    if (pieces_.size() > 1) kind = pieces_.at(i).polyhedral() ? ConstraintKind::polyhedron : ConstraintKind::cone;
    ConstraintSet out(dim_, kind);
    out.pieces_.push_back(pieces_.at(i));
    return out;
}

std::string ConstraintSet::describe() const {
    std::ostringstream out;
    out << to_string(kind_) << " in R^" << dim_;
    if (oracle_) out << " (" << oracle_->label << ")";
    else if (pieces_.size() > 1) out << " with " << pieces_.size() << " pieces";
    return out.str();
}

}  // namespace levyopt

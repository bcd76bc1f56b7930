#pragma once

#include "levyopt/common.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace levyopt {

/// a . y <= bound
struct LinearIneq {
    Vector a;
    double bound = 0.0;
};

/// |P y - center| <= radius + slope . y  (balls, second-order cones and their linear preimages).
struct NormIneq {
    Matrix P;
    Vector center;
    Vector slope;
    double radius = 0.0;
};

/// Closed convex set given by finitely many linear and norm inequalities.
struct ConvexPiece {
    std::vector<LinearIneq> linear;
    std::vector<NormIneq> norms;
    bool bounded = false;  ///< known to be compact

    bool contains(const Vector& y, double tol) const;
    bool polyhedral() const { return norms.empty(); }
};

/// Star-shaped set known only through membership and the radial extent sup{t >= 0 : t u in C}.
struct StarOracle {
    std::function<bool(const Vector&)> contains;
    std::function<double(const Vector&)> radial_bound;  ///< argument is a unit vector; may return +inf
    bool bounded = false;
    std::string label = "oracle";
};

enum class ConstraintKind { none, polyhedron, box, ball, hull, cone, union_of, oracle };

std::string to_string(ConstraintKind kind);

/// Pieces of a union may miss the origin as long as the union contains it.
enum class OriginCheck { require, skip };

/// Constraint set C with 0 in C: a finite union of convex pieces or a star-shaped oracle.
class ConstraintSet {
public:
    static ConstraintSet unconstrained(Eigen::Index dim);
    /// {y : A y <= upper}
    static ConstraintSet polyhedron(const Matrix& A, const Vector& upper, OriginCheck check = OriginCheck::require);
    static ConstraintSet box(const Vector& lower, const Vector& upper, OriginCheck check = OriginCheck::require);
    static ConstraintSet ball(const Vector& center, double radius, OriginCheck check = OriginCheck::require);
    static ConstraintSet hull(const std::vector<Vector>& points, OriginCheck check = OriginCheck::require);
    /// Second-order cone {y : |P y| <= slope . y}.
    static ConstraintSet cone(const Matrix& P, const Vector& slope);
    /// Finite union of convex sets; the union must contain 0.
    static ConstraintSet union_of(const std::vector<ConstraintSet>& parts);
    static ConstraintSet oracle(Eigen::Index dim, StarOracle oracle);
    /// Wraps arbitrary pieces (used by preimages and the transform).
    static ConstraintSet from_pieces(Eigen::Index dim, std::vector<ConvexPiece> pieces, ConstraintKind kind);

    Eigen::Index dim() const { return dim_; }
    ConstraintKind kind() const { return kind_; }
    const std::vector<ConvexPiece>& pieces() const { return pieces_; }
    const std::optional<StarOracle>& star_oracle() const { return oracle_; }

    bool contains(const Vector& y, double tol = 1e-9) const;
    bool is_oracle() const { return oracle_.has_value(); }
    bool convex() const { return !oracle_ && pieces_.size() == 1; }
    bool polyhedral() const;
    bool compact() const;
    /// Every piece contains the origin (then the union is star-shaped about 0).
    bool star_shaped() const;
    bool unconstrained_set() const;

    /// {z : L^T z in C}.
    ConstraintSet preimage(const Matrix& L) const;
    /// Adds |y| <= radius to every piece.
    ConstraintSet intersect_ball(double radius) const;

    /// Piece i as a standalone convex set.
    ConstraintSet piece_set(std::size_t i) const;

    std::string describe() const;

private:
    ConstraintSet(Eigen::Index dim, ConstraintKind kind) : dim_(dim), kind_(kind) {}
    void require_origin() const;

    Eigen::Index dim_ = 0;
    ConstraintKind kind_ = ConstraintKind::none;
    std::vector<ConvexPiece> pieces_;
    std::optional<StarOracle> oracle_;
};

/// Whether {y : a_i . y <= 0, |P_j y| <= slope_j . y} is {0}, i.e. the piece has no recession direction.
bool piece_recession_trivial(const ConvexPiece& piece, Eigen::Index dim);

/// Linear facets of conv(points), including equalities for the orthogonal complement of their span.
std::vector<LinearIneq> hull_facets(const std::vector<Vector>& points, double tol = 1e-10);

}  // namespace levyopt

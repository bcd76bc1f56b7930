#include "fixtures.hpp"

#include "levyopt/constraints.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace levyopt;
using fixtures::scalar;
using fixtures::vec;

TEST(ConstraintSet, Unconstrained) {
    const auto C = ConstraintSet::unconstrained(3);
    EXPECT_TRUE(C.contains(vec({1e6, -1e6, 3})));
    EXPECT_TRUE(C.unconstrained_set());
    EXPECT_TRUE(C.convex());
    EXPECT_TRUE(C.polyhedral());
    EXPECT_FALSE(C.compact());
}

TEST(ConstraintSet, Box) {
    const auto C = ConstraintSet::box(vec({0, -1}), vec({1, 2}));
    EXPECT_TRUE(C.contains(vec({1, 2})));
    EXPECT_FALSE(C.contains(vec({1.01, 0})));
    EXPECT_TRUE(C.compact());
    EXPECT_TRUE(C.polyhedral());
    EXPECT_EQ(C.kind(), ConstraintKind::box);
    EXPECT_THROW(ConstraintSet::box(vec({0.5}), vec({1})), DomainError);  // origin missing
}

TEST(ConstraintSet, Ball) {
    const auto C = ConstraintSet::ball(vec({0.5, 0}), 1.0);
    EXPECT_TRUE(C.contains(vec({1.5, 0})));
    EXPECT_FALSE(C.contains(vec({-0.6, 0})));
    EXPECT_TRUE(C.compact());
    EXPECT_FALSE(C.polyhedral());
}

TEST(ConstraintSet, HullOfSquare) {
    const auto C = ConstraintSet::hull({vec({-1, -1}), vec({1, -1}), vec({1, 1}), vec({-1, 1}), vec({0, 0})});
    EXPECT_TRUE(C.contains(vec({0.99, -0.99})));
    EXPECT_FALSE(C.contains(vec({1.01, 0})));
    EXPECT_TRUE(C.compact());
    const auto facets = hull_facets({vec({-1, -1}), vec({1, -1}), vec({1, 1}), vec({-1, 1})});
    EXPECT_EQ(facets.size(), 4u);
}

TEST(ConstraintSet, LowerDimensionalHull) {
    // segment from 0 to (1, 1): equalities pin the orthogonal direction
    const auto C = ConstraintSet::hull({vec({0, 0}), vec({1, 1})});
    EXPECT_TRUE(C.contains(vec({0.5, 0.5})));
    EXPECT_FALSE(C.contains(vec({0.5, 0.4})));
    EXPECT_FALSE(C.contains(vec({1.1, 1.1})));
}

TEST(ConstraintSet, IceCreamCone) {
    Matrix P(2, 3);
    P << 1, 0, 0, 0, 1, 0;
    const auto C = ConstraintSet::cone(P, vec({0, 0, 1}));
    EXPECT_TRUE(C.contains(vec({0.6, 0.8, 1.0})));
    EXPECT_FALSE(C.contains(vec({0.6, 0.8, 0.99})));
    EXPECT_FALSE(C.contains(vec({0, 0, -1})));
    EXPECT_FALSE(C.compact());
    EXPECT_TRUE(C.convex());
}

TEST(ConstraintSet, UnionIsStarShaped) {
    const auto C = ConstraintSet::union_of({ConstraintSet::hull({vec({0, 0}), vec({1, 0})}),
                                            ConstraintSet::hull({vec({0, 0}), vec({0, 2})})});
    EXPECT_FALSE(C.convex());
    EXPECT_TRUE(C.star_shaped());
    EXPECT_TRUE(C.contains(vec({0, 1.5})));
    EXPECT_FALSE(C.contains(vec({0.5, 0.5})));
}

TEST(ConstraintSet, UnionWithDetachedPiece) {
    const auto C = ConstraintSet::union_of({ConstraintSet::box(scalar(0), scalar(0)), ConstraintSet::hull({scalar(0.5), scalar(1.0)}, OriginCheck::skip)});
    EXPECT_TRUE(C.contains(scalar(0.0)));
    EXPECT_TRUE(C.contains(scalar(0.7)));
    EXPECT_FALSE(C.contains(scalar(0.3)));
    EXPECT_FALSE(C.star_shaped());
    EXPECT_TRUE(C.compact());
}

TEST(ConstraintSet, Preimage) {
    // {z : L^T z in [0, 1]} with L = [2]
    const auto C = ConstraintSet::box(scalar(0), scalar(1)).preimage(Matrix::Constant(1, 1, 2.0));
    EXPECT_TRUE(C.contains(scalar(0.5)));
    EXPECT_FALSE(C.contains(scalar(0.51)));
}

TEST(ConstraintSet, IntersectBall) {
    const auto C = ConstraintSet::unconstrained(2).intersect_ball(2.0);
    EXPECT_TRUE(C.compact());
    EXPECT_TRUE(C.contains(vec({1.2, 1.6})));
    EXPECT_FALSE(C.contains(vec({1.5, 1.5})));
}

TEST(ConstraintSet, OracleRequiresOrigin) {
    StarOracle disc{[](const Vector& y) { return y.norm() <= 1.0; }, [](const Vector&) { return 1.0; }, true, "disc"};
    const auto C = ConstraintSet::oracle(2, disc);
    EXPECT_TRUE(C.is_oracle());
    EXPECT_TRUE(C.contains(vec({0.6, 0.6})));
    StarOracle shifted{[](const Vector& y) { return (y - vec({2, 0})).norm() <= 1.0; }, [](const Vector&) { return 3.0; },
                       true, "shifted"};
    EXPECT_THROW(ConstraintSet::oracle(2, shifted), DomainError);
}

TEST(ConstraintSet, RecessionOfPieces) {
    EXPECT_TRUE(piece_recession_trivial(ConstraintSet::box(vec({-1, -1}), vec({1, 1})).pieces().front(), 2));
    EXPECT_FALSE(piece_recession_trivial(ConstraintSet::unconstrained(2).pieces().front(), 2));
    Matrix P(2, 3);
    P << 1, 0, 0, 0, 1, 0;
    EXPECT_FALSE(piece_recession_trivial(ConstraintSet::cone(P, vec({0, 0, 1})).pieces().front(), 3));
}

// Convex pieces are closed under convex combinations.
TEST(ConstraintSet, ConvexCombinationsStayInside) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::uniform_real_distribution<double> w(0.0, 1.0);
    Matrix P(2, 3);
    P << 1, 0, 0, 0, 1, 0;
    const std::vector<ConstraintSet> sets = {ConstraintSet::ball(vec({0.3, 0.1, 0}), 1.0),
                                             ConstraintSet::cone(P, vec({0, 0, 1})),
                                             ConstraintSet::box(vec({-1, 0, -0.5}), vec({1, 1, 0.5}))};
    for (const auto& C : sets) {
        std::vector<Vector> inside;
        for (int k = 0; k < 20000 && inside.size() < 60; ++k) {
            const Vector a = vec({u(rng), u(rng), u(rng)});
            if (C.contains(a)) inside.push_back(a);
        }
        ASSERT_EQ(inside.size(), 60u);
        for (std::size_t i = 0; i + 1 < inside.size(); ++i) {
            const double t = w(rng);
            EXPECT_TRUE(C.contains(t * inside[i] + (1 - t) * inside[i + 1]));
        }
    }
}

#include "fixtures.hpp"

#include "levyopt/g_objective.hpp"
#include "levyopt/optimizer.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace levyopt;
using fixtures::mat1;
using fixtures::scalar;
using fixtures::vec;

namespace {

struct GridBest {
    double y = 0.0;
    double g = -kInf;
};

// Exhaustive 1-d grid over [lo, hi] restricted to C, step 1e-3.
GridBest grid_1d(const LevyTriplet& t, const ConstraintSet& C, double p, double lo, double hi) {
    const Objective obj(t, p);
    GridBest best;
    const int n = static_cast<int>(std::lround((hi - lo) / 1e-3));
    for (int i = 0; i <= n; ++i) {
        const double y = lo + 1e-3 * i;
        if (!C.contains(scalar(y))) continue;
        const double g = obj.value_or_minus_inf(scalar(y));
        if (g > best.g) best = {y, g};
    }
    return best;
}

ConstraintSet half_line() { return ConstraintSet::polyhedron(Matrix::Constant(1, 1, -1.0), scalar(0.0)); }

}  // namespace

TEST(MaximizeConvex, Merton) {
    const auto s = maximize_convex(fixtures::merton(), ConstraintSet::unconstrained(1), 0.5);
    EXPECT_NEAR(s.pi_hat(0), 4.0, 1e-8);
    EXPECT_NEAR(s.g_star, 0.16, 1e-10);
    EXPECT_NEAR(s.a, 0.16, 1e-10);
    EXPECT_EQ(s.location, Location::interior);
    EXPECT_EQ(s.finiteness, FinitenessVerdict::finite);
    EXPECT_TRUE(s.maximizer_attained);
    EXPECT_NEAR(s.G_at_zero, 0.0, 1e-9);
}

TEST(MaximizeConvex, MertonOnUnitInterval) {
    const auto s = maximize_convex(fixtures::merton(), ConstraintSet::box(scalar(0), scalar(1)), 0.5);
    EXPECT_NEAR(s.pi_hat(0), 1.0, 1e-8);
    EXPECT_NEAR(s.g_star, 0.07, 1e-10);
    EXPECT_EQ(s.location, Location::c_boundary);
    EXPECT_NEAR(s.G_at_zero, -0.06, 1e-8);
}

TEST(MaximizeConvex, CompoundPoisson) {
    const auto t = fixtures::compound_poisson();
    const auto s = maximize_convex(t, ConstraintSet::unconstrained(1), 0.5);
    EXPECT_NEAR(s.pi_hat(0), 1.125, 1e-8);
    EXPECT_NEAR(s.g_star, 0.05, 1e-12);
    const auto grid = grid_1d(t, ConstraintSet::unconstrained(1), 0.5, -2.0, 4.0);
    EXPECT_NEAR(grid.y, s.pi_hat(0), 1e-3);
    EXPECT_NEAR(grid.g, s.g_star, 1e-6);
}

TEST(MaximizeConvex, BoundaryOptimumOfNaturalConstraints) {
    const auto s = maximize_convex(fixtures::boundary_argmax(), ConstraintSet::unconstrained(1), 0.5);
    EXPECT_NEAR(s.pi_hat(0), 1.0, 1e-8);
    EXPECT_EQ(s.location, Location::c0_boundary);
    EXPECT_LT(s.G_at_zero, -0.3);
}

TEST(MaximizeConvex, NegativePowerStaysInsideStrictDomain) {
    const auto t = fixtures::negative_jump();
    const auto s = maximize_convex(t, ConstraintSet::box(scalar(0), scalar(1)), -1.0);
    EXPECT_LT(s.pi_hat(0), 1.0);
    EXPECT_TRUE(natural_constraints(t).contains_strict(s.pi_hat));
    const auto grid = grid_1d(t, ConstraintSet::box(scalar(0), scalar(1)), -1.0, 0.0, 1.0);
    EXPECT_NEAR(grid.y, s.pi_hat(0), 1e-3);
    EXPECT_NEAR(grid.g, s.g_star, 1e-6);
}

TEST(MaximizeConvex, ConeWithoutMaximizer) {
    Matrix P(2, 3);
    P << 1, 0, 0, 0, 1, 0;
    const auto s = maximize_convex(fixtures::cone_market(), ConstraintSet::cone(P, vec({0, 0, 1})), 0.5);
    EXPECT_FALSE(s.maximizer_attained);
    bool warned = false;
    for (const auto& w : s.warnings) warned = warned || w.find("ProjectionNotClosed") != std::string::npos;
    EXPECT_TRUE(warned);
    // unconstrained Merton value along e_1 with beta = 2: g(2 e_1) = 2 - 1 = 1
    EXPECT_NEAR(s.g_star, 1.0, 1e-6);
    EXPECT_NEAR(s.pi_hat(0), 2.0, 1e-3);
}

TEST(MaximizeConvex, NuipViolationIsReported) {
    const auto s = maximize_convex(fixtures::increasing_jump(), half_line(), 0.5);
    EXPECT_EQ(s.finiteness, FinitenessVerdict::nuip_violated);
    ASSERT_EQ(s.nuip_witness.size(), 1);
    EXPECT_GT(s.nuip_witness(0), 0.0);
    EXPECT_FALSE(s.maximizer_attained);
}

TEST(MaximizeConvex, InfiniteValue) {
    const auto s = maximize_convex(fixtures::pareto(0.3), ConstraintSet::unconstrained(1), 0.5);
    EXPECT_EQ(s.finiteness, FinitenessVerdict::infinite_value);
}

TEST(MaximizeConvex, MinimalNormRepresentative) {
    const auto t = fixtures::duplicated_asset();
    const auto s = maximize_convex(t, ConstraintSet::unconstrained(2), -1.0);
    EXPECT_NEAR(s.pi_hat(0), s.pi_hat(1), 1e-8);  // orthogonal to (1, -1)
    // a box that is not N-invariant still yields an optimum equal modulo N
    const auto boxed = maximize_convex(t, ConstraintSet::box(vec({-0.1, -1}), vec({1, 1})), -1.0);
    EXPECT_NEAR(boxed.g_star, s.g_star, 1e-10);
    const Matrix N = null_space(t);
    EXPECT_LE((project_onto_N_perp(boxed.pi_hat, N) - s.pi_hat).norm(), 1e-6);
    EXPECT_TRUE(ConstraintSet::box(vec({-0.1, -1}), vec({1, 1})).contains(boxed.pi_hat));
}

TEST(MaximizeConvex, RateFollowsValue) {
    for (double p : {-2.0, -0.5, 0.3, 0.5}) {
        const auto s = maximize_convex(fixtures::compound_poisson(), ConstraintSet::unconstrained(1), p);
        EXPECT_DOUBLE_EQ(s.a, p / (1.0 - p) * s.g_star);
    }
}

TEST(MaximizeConvex, FirstOrderOptimality) {
    const auto t = fixtures::two_asset_jumps();
    const auto C = ConstraintSet::ball(vec({0.2, 0.0}), 1.0);
    const auto s = maximize_convex(t, C, 0.5);
    const Objective obj(t, 0.5);
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-1.0, 1.2);
    int tested = 0;
    for (int k = 0; k < 2000 && tested < 200; ++k) {
        const Vector y = vec({u(rng), u(rng)});
        if (!C.contains(y) || !obj.in_domain(y)) continue;
        EXPECT_LE(obj.directional(y, s.pi_hat), 1e-6);
        ++tested;
    }
    EXPECT_GT(tested, 100);
}

TEST(MaximizeConvex, TwoAssetGridOracle) {
    const auto t = fixtures::two_asset_jumps();
    const auto s = maximize_convex(t, ConstraintSet::unconstrained(2), -1.0);
    const Objective obj(t, -1.0);
    // coarse scan then a 1e-3 grid around the coarse winner
    Vector best = Vector::Zero(2);
    double gbest = 0.0;
    for (double a = -3.0; a <= 3.0; a += 0.05) {
        for (double b = -3.0; b <= 3.0; b += 0.05) {
            const double g = obj.value_or_minus_inf(vec({a, b}));
            if (g > gbest) gbest = g, best = vec({a, b});
        }
    }
    const Vector centre = best;
    for (int i = -60; i <= 60; ++i) {
        for (int k = -60; k <= 60; ++k) {
            const Vector y = centre + 1e-3 * vec({double(i), double(k)});
            const double g = obj.value_or_minus_inf(y);
            if (g > gbest) gbest = g, best = y;
        }
    }
    EXPECT_LE((best - s.pi_hat).cwiseAbs().maxCoeff(), 1e-3);
    EXPECT_NEAR(gbest, s.g_star, 1e-6);
    EXPECT_GE(s.g_star, gbest - 1e-12);
}

TEST(MaximizeNonconvex, DetachedInterval) {
    const auto C = ConstraintSet::union_of({ConstraintSet::box(scalar(0), scalar(0)), ConstraintSet::hull({scalar(0.5), scalar(1.0)}, OriginCheck::skip)});
    const auto s = maximize_nonconvex(fixtures::merton(), C, 0.5);
    EXPECT_NEAR(s.pi_hat(0), 1.0, 1e-6);
    EXPECT_NEAR(s.g_star, 0.07, 1e-9);
}

TEST(MaximizeNonconvex, TwoSegmentsThroughOrigin) {
    Matrix c = Matrix::Zero(2, 2);
    c(0, 0) = c(1, 1) = 0.04;
    const LevyTriplet t(vec({0.08, 0.05}), c);
    const auto C = ConstraintSet::union_of({ConstraintSet::hull({vec({0, 0}), vec({1, 0})}),
                                            ConstraintSet::hull({vec({0, 0}), vec({0, 3})})});
    const auto s = maximize_nonconvex(t, C, 0.5);
    // grid oracle along each segment
    double best = -kInf;
    Vector arg;
    for (int i = 0; i <= 3000; ++i) {
        for (const Vector& y : {vec({i / 3000.0, 0.0}), vec({0.0, i / 1000.0})}) {
            const double g = eval_g(y, t, 0.5).value;
            if (g > best) best = g, arg = y;
        }
    }
    EXPECT_NEAR(s.g_star, best, 1e-6);
    EXPECT_LE((s.pi_hat - arg).norm(), 1e-3);
    EXPECT_NEAR(s.pi_hat(0), 1.0, 1e-6);
}

TEST(MaximizeNonconvex, AgreesWithConvexSolver) {
    for (const auto& C : {ConstraintSet::box(scalar(-1), scalar(1)), ConstraintSet::unconstrained(1)}) {
        const auto a = maximize_convex(fixtures::compound_poisson(), C, 0.5);
        const auto b = maximize_nonconvex(fixtures::compound_poisson(), C, 0.5);
        EXPECT_NEAR(a.g_star, b.g_star, 1e-9);
        EXPECT_NEAR(a.pi_hat(0), b.pi_hat(0), 1e-6);
    }
}

TEST(MaximizeNonconvex, StarShapedOracle) {
    // disc of radius 1 given only by membership: Merton optimum clipped at 1
    StarOracle disc{[](const Vector& y) { return y.norm() <= 1.0 + 1e-12; }, [](const Vector& u) { return 1.0 / u.norm(); },
                    true, "disc"};
    const auto s = maximize_nonconvex(fixtures::merton(), ConstraintSet::oracle(1, disc), 0.5);
    EXPECT_NEAR(s.pi_hat(0), 1.0, 1e-6);
    EXPECT_NEAR(s.g_star, 0.07, 1e-8);
}

TEST(SolvePortfolio, DispatchesOnShape) {
    const auto convex = solve_portfolio(fixtures::merton(), ConstraintSet::box(scalar(0), scalar(1)), 0.5);
    const auto union_set = solve_portfolio(
        fixtures::merton(),
        ConstraintSet::union_of({ConstraintSet::box(scalar(0), scalar(0)), ConstraintSet::hull({scalar(0.5), scalar(1.0)}, OriginCheck::skip)}), 0.5);
    EXPECT_NEAR(convex.g_star, union_set.g_star, 1e-9);
}

TEST(CheckC3, Examples) {
    const auto t = fixtures::negative_jump();  // 1 is in C0 but not in C0*
    const auto nc = natural_constraints(t);
    EXPECT_TRUE(check_C3(ConstraintSet::box(scalar(0), scalar(1)), nc).holds);
    EXPECT_TRUE(check_C3(ConstraintSet::union_of({ConstraintSet::box(scalar(0), scalar(0)), ConstraintSet::box(scalar(1), scalar(1), OriginCheck::skip)}),
                         natural_constraints(fixtures::merton()))
                    .holds);  // C0* = C0
    EXPECT_FALSE(check_C3(ConstraintSet::union_of({ConstraintSet::box(scalar(0), scalar(0)), ConstraintSet::box(scalar(1), scalar(1), OriginCheck::skip)}), nc)
                     .holds);
}

TEST(ClassifyFiniteness, Examples) {
    const auto C = ConstraintSet::unconstrained(1);
    EXPECT_EQ(classify_finiteness(fixtures::pareto(0.3), C, -1.0), FinitenessClass::finite);
    EXPECT_EQ(classify_finiteness(fixtures::pareto(0.7), C, 0.5), FinitenessClass::finite);
    EXPECT_EQ(classify_finiteness(fixtures::pareto(0.3), C, 0.5), FinitenessClass::infinite);
    // the heavy tail is harmless when long positions are forbidden
    EXPECT_EQ(classify_finiteness(fixtures::pareto(0.3), ConstraintSet::polyhedron(Matrix::Constant(1, 1, 1.0), scalar(0.0)), 0.5),
              FinitenessClass::finite);
}

TEST(ClassifyFiniteness, HeavyTailsFinishQuickly) {
    const auto s = solve_portfolio(fixtures::pareto(0.7), ConstraintSet::unconstrained(1), 0.5);
    EXPECT_EQ(s.finiteness, FinitenessVerdict::finite);
    EXPECT_NEAR(s.G_at_zero, 0.0, 1e-7);
    const auto grid = grid_1d(fixtures::pareto(0.7), ConstraintSet::unconstrained(1), 0.5, 0.0, 10.0);
    EXPECT_NEAR(grid.y, s.pi_hat(0), 1e-3);
    EXPECT_NEAR(grid.g, s.g_star, 1e-6);
}

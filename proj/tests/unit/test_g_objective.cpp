#include "fixtures.hpp"

#include "levyopt/g_objective.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace levyopt;
using fixtures::mat1;
using fixtures::scalar;
using fixtures::vec;

namespace {

// g for b, c and jumps uniform on [lo, hi] inside [-1, 1] with total mass k, via the antiderivative
// of ((1 + y r)^p - 1) / p - y r.
double uniform_oracle(double y, double b, double c, double p, double lo, double hi, double k) {
    auto anti = [&](double r) {
        if (y == 0.0) return 0.0;
        return std::pow(1.0 + y * r, p + 1.0) / (y * p * (p + 1.0)) - r / p - y * r * r / 2.0;
    };
    return y * b + 0.5 * (p - 1.0) * c * y * y + k / (hi - lo) * (anti(hi) - anti(lo));
}

double cp_closed_form(double y) { return 0.1 * y + 2.0 * std::sqrt(1.0 + 0.5 * y) - 2.0 - 0.5 * y; }

}  // namespace

TEST(EvalG, ZeroAtOrigin) {
    for (const auto& t : {fixtures::merton(), fixtures::compound_poisson(), fixtures::dense_near_minus_one(),
                          fixtures::boundary_argmax(), fixtures::negative_jump(), fixtures::pareto(0.7)}) {
        for (double p : {-2.0, -0.5, 0.3, 0.5}) EXPECT_EQ(eval_g(Vector::Zero(t.dim()), t, p).value, 0.0);
    }
    EXPECT_EQ(eval_g(Vector::Zero(2), fixtures::two_asset_jumps(), 0.5).value, 0.0);
}

TEST(EvalG, MertonQuadratic) {
    const auto t = fixtures::merton();
    EXPECT_NEAR(eval_g(scalar(4.0), t, 0.5).value, 0.16, 1e-15);
    for (double y : {-3.0, 0.5, 7.0}) EXPECT_NEAR(eval_g(scalar(y), t, 0.5).value, 0.08 * y - 0.01 * y * y, 1e-15);
}

TEST(EvalG, CompoundPoissonClosedForm) {
    const auto t = fixtures::compound_poisson();
    EXPECT_NEAR(eval_g(scalar(1.125), t, 0.5).value, 0.05, 1e-14);
    for (double y : {-1.9, -1.0, 0.3, 1.125, 4.0, 20.0}) {
        EXPECT_NEAR(eval_g(scalar(y), t, 0.5).value, cp_closed_form(y), 1e-13) << y;
    }
}

TEST(EvalG, UniformDensityAgainstAntiderivative) {
    JumpMeasure j;
    j.densities.push_back(make_uniform(scalar(1.0), -0.5, 0.8, 0.9));
    const LevyTriplet t(scalar(0.05), mat1(0.02), j);
    for (double p : {-1.5, -0.5, 0.3, 0.7}) {
        for (double y : {-1.1, -0.3, 0.4, 1.3, 1.9}) {
            EXPECT_NEAR(eval_g(scalar(y), t, p).value, uniform_oracle(y, 0.05, 0.02, p, -0.5, 0.8, 0.9), 1e-11)
                << "p " << p << " y " << y;
        }
    }
}

TEST(EvalG, BoundaryAtomGivesMinusInfinityForNegativeP) {
    JumpMeasure j;
    j.atoms.push_back({scalar(-0.5), 1.0});
    const LevyTriplet t(scalar(0.0), mat1(0.0), j);
    const auto g = eval_g(scalar(2.0), t, -1.0);
    EXPECT_EQ(g.value, -kInf);
    EXPECT_TRUE(g.boundary_atom);
    // positive p: the atom only contributes (0 - 1) / p
    EXPECT_TRUE(std::isfinite(eval_g(scalar(2.0), t, 0.5).value));
}

TEST(EvalG, DivergentTailGivesPlusInfinity) {
    const auto g = eval_g(scalar(1.0), fixtures::pareto(0.3), 0.5);
    EXPECT_EQ(g.value, kInf);
    EXPECT_TRUE(g.tail_divergent);
    EXPECT_TRUE(std::isfinite(eval_g(scalar(1.0), fixtures::pareto(0.7), 0.5).value));
    // a zero position never sees the tail
    EXPECT_EQ(eval_g(scalar(0.0), fixtures::pareto(0.3), 0.5).value, 0.0);
}

TEST(EvalG, OutsideC0Throws) {
    EXPECT_THROW(eval_g(scalar(-2.5), fixtures::compound_poisson(), 0.5), DomainError);
    EXPECT_THROW(eval_g(scalar(1.01), fixtures::boundary_argmax(), 0.5), DomainError);
}

TEST(EvalG, SignStructure) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.9, 3.9);
    const auto t = fixtures::compound_poisson();
    for (int k = 0; k < 50; ++k) {
        const double y = u(rng);
        EXPECT_GT(eval_g(scalar(y), t, 0.5).value, -kInf);
        EXPECT_LT(eval_g(scalar(y), t, -1.0).value, kInf);
    }
}

TEST(EvalBigG, VanishesOnTheDiagonal) {
    const auto t = fixtures::two_asset_jumps();
    for (const Vector& y : {vec({0.1, 0.2}), vec({-0.5, 0.3}), vec({1.0, -1.0})}) {
        EXPECT_EQ(eval_G(y, y, t, 0.5), 0.0);
    }
}

TEST(EvalBigG, StationaryPoints) {
    EXPECT_NEAR(eval_G(scalar(0.0), scalar(4.0), fixtures::merton(), 0.5), 0.0, 1e-15);
    EXPECT_NEAR(eval_G(scalar(0.0), scalar(1.125), fixtures::compound_poisson(), 0.5), 0.0, 1e-14);
    // C = [0, 1] Merton: -pi (b + (p - 1) c pi) at pi = 1
    EXPECT_NEAR(eval_G(scalar(0.0), scalar(1.0), fixtures::merton(), 0.5), -0.06, 1e-15);
}

TEST(EvalBigG, MatchesCentralDifference) {
    const auto t = fixtures::compound_poisson();
    for (double y : {-1.0, 0.2, 1.125, 3.0}) {
        const double h = 1e-5;
        const double fd = (cp_closed_form(y + h) - cp_closed_form(y - h)) / (2 * h);
        EXPECT_NEAR(eval_G(scalar(0.0), scalar(y), t, 0.5), -y * fd, 1e-9) << y;
    }
}

TEST(EvalBigG, BoundaryDerivativeOfDownwardJumps) {
    // b = 2, jumps uniform on [-1, -0.5]: g'(1) = 2 + int_{-1}^{-0.5} 2 [r (1 + r)^{-1/2} - r] dr
    const double lo = -1.0, hi = -0.5;
    auto anti = [](double r) {
        const double s = 1.0 + r;  // int r s^{-1/2} dr = (2/3) s^{3/2} - 2 s^{1/2}
        return (2.0 / 3.0) * std::pow(s, 1.5) - 2.0 * std::sqrt(s) - r * r / 2.0;
    };
    const double derivative = 2.0 + 2.0 * (anti(hi) - anti(lo));
    // the inverse square root at r = -1 limits the quadrature to about sqrt(machine epsilon)
    EXPECT_NEAR(eval_G(scalar(0.0), scalar(1.0), fixtures::boundary_argmax(), 0.5), -derivative, 1e-7);
    EXPECT_LT(eval_G(scalar(0.0), scalar(1.0), fixtures::boundary_argmax(), 0.5), 0.0);
}

TEST(EvalGOnSegment, Examples) {
    const auto zeros = eval_g_on_segment(scalar(0.0), fixtures::merton(), 0.5, 4);
    for (const auto& g : zeros) EXPECT_EQ(g.value, 0.0);

    const auto parabola = eval_g_on_segment(scalar(8.0), fixtures::merton(), 0.5, 5);
    ASSERT_EQ(parabola.size(), 5u);
    std::size_t best = 0;
    for (std::size_t i = 0; i < parabola.size(); ++i) {
        if (parabola[i].value > parabola[best].value) best = i;
        EXPECT_NEAR(parabola[i].value, 0.08 * 2.0 * i - 0.01 * 4.0 * i * i, 1e-14);
    }
    EXPECT_EQ(best, 2u);

    JumpMeasure j;
    j.atoms.push_back({scalar(-0.5), 1.0});
    const auto edge = eval_g_on_segment(scalar(2.0), LevyTriplet(scalar(0.1), mat1(0.0), j), -1.0, 5);
    EXPECT_EQ(edge.back().value, -kInf);
    for (std::size_t i = 0; i + 1 < edge.size(); ++i) EXPECT_TRUE(std::isfinite(edge[i].value));
}

TEST(Objective, GradientAndHessianAgainstDifferences) {
    const Objective obj(fixtures::two_asset_jumps(), 0.5);
    const Vector y = vec({0.4, -0.3});
    const Vector g = obj.gradient(y);
    const Matrix H = obj.hessian(y);
    const double h = 1e-5;
    for (int i = 0; i < 2; ++i) {
        const Vector e = Vector::Unit(2, i) * h;
        EXPECT_NEAR(g(i), (obj.value(y + e).value - obj.value(y - e).value) / (2 * h), 1e-8);
        const Vector dg = (obj.gradient(y + e) - obj.gradient(y - e)) / (2 * h);
        EXPECT_NEAR(H(0, i), dg(0), 1e-6);
        EXPECT_NEAR(H(1, i), dg(1), 1e-6);
    }
}

TEST(Objective, HessianStaysFiniteForHeavyTails) {
    const Objective obj(fixtures::pareto(0.7), 0.5);
    const double h = obj.hessian(scalar(3.0))(0, 0);
    EXPECT_TRUE(std::isfinite(h));
    EXPECT_LT(h, 0.0);
    EXPECT_GT(h, -1.0);
}

TEST(PowerIncrement, SmallArguments) {
    EXPECT_NEAR(power_increment(1e-12, 0.5), 1e-12, 1e-24);
    EXPECT_NEAR(power_increment(0.5, 0.5), 2.0 * (std::sqrt(1.5) - 1.0), 1e-15);
    EXPECT_NEAR(power_increment(-0.5, -1.0), -1.0, 1e-15);
}

// g is concave: random midpoints sit above the chord.
TEST(Properties, Concavity) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    const auto t = fixtures::two_asset_jumps();
    const Objective obj(t, -0.7);
    int tested = 0;
    for (int k = 0; k < 2000 && tested < 300; ++k) {
        const Vector a = vec({u(rng), u(rng)});
        const Vector b = vec({u(rng), u(rng)});
        if (!obj.in_domain(a) || !obj.in_domain(b)) continue;
        const double ga = obj.value(a).value, gb = obj.value(b).value;
        if (!std::isfinite(ga) || !std::isfinite(gb)) continue;
        EXPECT_GE(obj.value(0.5 * (a + b)).value, 0.5 * (ga + gb) - 1e-9);
        ++tested;
    }
    EXPECT_GT(tested, 100);
}

TEST(Properties, NullInvariance) {
    const auto t = fixtures::duplicated_asset();
    const Vector n = vec({1.0, -1.0});
    for (const Vector& y : {vec({0.1, 0.2}), vec({-0.5, 0.7}), vec({1.0, 0.5})}) {
        for (double s : {-3.0, 0.5, 10.0}) {
            EXPECT_NEAR(eval_g(y + s * n, t, -1.0).value, eval_g(y, t, -1.0).value, 1e-12);
        }
    }
}

TEST(Properties, ContinuityAlongSequences) {
    // p in (0, 1) with the moment condition: values along y_n -> y converge
    const auto t = fixtures::pareto(0.7);
    const double limit = eval_g(scalar(2.0), t, 0.5).value;
    double previous_gap = kInf;
    for (int n = 1; n <= 6; ++n) {
        const double gap = std::abs(eval_g(scalar(2.0 + std::pow(10.0, -n)), t, 0.5).value - limit);
        EXPECT_LT(gap, previous_gap);
        previous_gap = gap;
    }
    EXPECT_LT(previous_gap, 1e-6);
}

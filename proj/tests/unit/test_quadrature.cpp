#include "fixtures.hpp"

#include "levyopt/quadrature.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace levyopt;
using fixtures::scalar;

namespace {

QuadratureOptions opts() { return {}; }

}  // namespace

TEST(Integrate, SmoothFinite) {
    const auto r = integrate([](double x) { return std::cos(x); }, 0.0, 1.5, opts());
    EXPECT_NEAR(r.value, std::sin(1.5), 1e-13);
    EXPECT_LE(r.error, 1e-9);
}

TEST(Integrate, EndpointSingularity) {
    const auto r = integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, opts(), {0.0});
    EXPECT_NEAR(r.value, 2.0, 1e-9);
}

TEST(Integrate, InteriorSingularity) {
    const auto r = integrate([](double x) { return std::pow(std::abs(x - 0.3), -0.5); }, 0.0, 1.0, opts(), {0.3});
    // abscissas next to 0.3 carry an absolute rounding of about 1e-16, worth sqrt(1e-16) here
    EXPECT_NEAR(r.value, 2.0 * (std::sqrt(0.3) + std::sqrt(0.7)), 1e-7);
}

TEST(Integrate, SingularityJustOutside) {
    const double eps = 1e-7;
    const auto r = integrate([eps](double x) { return 1.0 / std::sqrt(x + eps); }, 0.0, 1.0, opts(), {-eps});
    EXPECT_NEAR(r.value, 2.0 * (std::sqrt(1.0 + eps) - std::sqrt(eps)), 1e-8);
}

TEST(Integrate, AlgebraicTails) {
    const auto up = integrate([](double x) { return std::pow(x, -1.2); }, 1.0, kInf, opts());
    EXPECT_NEAR(up.value, 5.0, 1e-7);
    const auto down = integrate([](double x) { return 1.0 / (x * x); }, -kInf, -1.0, opts());
    EXPECT_NEAR(down.value, 1.0, 1e-10);
    const auto both = integrate([](double x) { return std::exp(-x * x); }, -kInf, kInf, opts());
    EXPECT_NEAR(both.value, std::sqrt(M_PI), 1e-10);
}

TEST(Integrate, EmptyInterval) { EXPECT_EQ(integrate([](double) { return 1.0; }, 1.0, 1.0, opts()).value, 0.0); }

TEST(IntegratePart, MassOfProfiles) {
    const auto one = [](double) { return 1.0; };
    EXPECT_NEAR(integrate_part(make_uniform(scalar(1.0), -0.5, 2.0, 1.3), one, {}, {}, 1e-10).value, 1.3, 1e-12);
    EXPECT_NEAR(integrate_part(make_exponential(scalar(1.0), 0.7, 3.0, 0.2), one, {}, {}, 1e-10).value, 0.7, 1e-9);
    EXPECT_NEAR(integrate_part(make_gaussian(scalar(1.0), 2.0, 0.1, 0.3), one, {}, {}, 1e-10).value, 2.0, 1e-9);
}

TEST(IntegratePart, BreakpointsHandleKinks) {
    const auto part = make_uniform(scalar(1.0), -2.0, 2.0, 4.0);  // unit density on [-2, 2]
    const auto h = [](double r) { return std::abs(r) <= 1.0 ? r * r : 0.0; };
    const auto r = integrate_part(part, h, cutoff_breakpoints(part), {}, 1e-10);
    EXPECT_NEAR(r.value, 2.0 / 3.0, 1e-12);
}

TEST(SingularHints, OnlyNearTheSupport) {
    const auto part = make_uniform(scalar(1.0), -1.0, -0.5, 1.0);
    ASSERT_EQ(singular_hints(part, 1.0).size(), 1u);  // r0 = -1 is the lower end
    EXPECT_DOUBLE_EQ(singular_hints(part, 1.0).front(), -1.0);
    EXPECT_EQ(singular_hints(part, 0.2).size(), 0u);  // r0 = -5 is far away
    EXPECT_EQ(singular_hints(part, 0.0).size(), 0u);
    EXPECT_EQ(singular_hints(part, -1.0).size(), 0u);  // r0 = 1
    EXPECT_EQ(singular_hints(part, 1.0 / 1.01).size(), 1u);  // just outside, within 5% of the span
}

TEST(CutoffBreakpoints, ScaleWithDirection) {
    const auto part = make_uniform(fixtures::vec({0.5, 0.5}), -3.0, 3.0, 1.0);
    const auto b = cutoff_breakpoints(part);
    ASSERT_EQ(b.size(), 2u);
    EXPECT_NEAR(b[1], std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(b[0], -std::sqrt(2.0), 1e-15);
}

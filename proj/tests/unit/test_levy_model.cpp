#include "fixtures.hpp"

#include "levyopt/levy_model.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace levyopt;
using fixtures::mat1;
using fixtures::scalar;
using fixtures::vec;

namespace {

bool has(const ValidationReport& r, ViolationKind k) {
    for (const auto& v : r.violations) {
        if (v.kind == k) return true;
    }
    return false;
}

}  // namespace

TEST(Cutoff, KeepsSmallJumpsOnly) {
    EXPECT_DOUBLE_EQ(cutoff(scalar(0.7))(0), 0.7);
    EXPECT_DOUBLE_EQ(cutoff(scalar(-1.0))(0), -1.0);
    EXPECT_DOUBLE_EQ(cutoff(scalar(1.5))(0), 0.0);
    EXPECT_DOUBLE_EQ(cutoff(vec({0.8, 0.8}))(0), 0.0);  // |x| > 1 in the Euclidean norm
}

TEST(ValidateModel, PureDiffusionIsValid) { EXPECT_TRUE(validate_model(fixtures::merton()).valid()); }

TEST(ValidateModel, AtomAtOriginIsReported) {
    JumpMeasure j;
    j.atoms.push_back({scalar(0.0), 1.0});
    const auto r = validate_model({scalar(0.0), mat1(0.0), j});
    EXPECT_FALSE(r.valid());
    EXPECT_TRUE(has(r, ViolationKind::atom_at_origin));
}

TEST(ValidateModel, NonPositiveAtomWeight) {
    JumpMeasure j;
    j.atoms.push_back({scalar(0.5), -1.0});
    EXPECT_TRUE(has(validate_model({scalar(0.0), mat1(0.0), j}), ViolationKind::atom_nonpositive_weight));
}

TEST(ValidateModel, CovarianceChecks) {
    Matrix asym(2, 2);
    asym << 1.0, 0.5, 0.0, 1.0;
    EXPECT_TRUE(has(validate_model({vec({0, 0}), asym}), ViolationKind::covariance_not_symmetric));
    Matrix indefinite(2, 2);
    indefinite << 1.0, 2.0, 2.0, 1.0;
    EXPECT_TRUE(has(validate_model({vec({0, 0}), indefinite}), ViolationKind::covariance_not_psd));
    // tiny negative eigenvalues within tol_psd are accepted
    EXPECT_TRUE(validate_model({scalar(0.0), mat1(-1e-12)}).valid());
}

TEST(ValidateModel, HeavyParetoTailIsStillLevy) {
    // 1 ^ |x|^2 integrates against x^{-1.3} on (1, inf) even though the mean is infinite
    EXPECT_TRUE(validate_model(fixtures::pareto(0.3)).valid());
}

TEST(ValidateModel, UnannotatedUnboundedDensity) {
    JumpMeasure j;
    j.densities.push_back(make_custom(scalar(1.0), [](double r) { return std::exp(-r); }, 0.5, kInf));
    EXPECT_TRUE(has(validate_model({scalar(0.0), mat1(0.0), j}), ViolationKind::missing_tail_model));
}

TEST(ValidateModel, NonIntegrableSmallJumps) {
    JumpMeasure j;
    // r^{-3.5} near 0: 1 ^ r^2 is not integrable
    j.densities.push_back(make_custom(scalar(1.0), [](double r) { return std::pow(r, -3.5); }, 0.0, 1.0));
    EXPECT_TRUE(has(validate_model({scalar(0.0), mat1(0.0), j}), ViolationKind::levy_integrability));
}

TEST(ValidateModel, IsIdempotent) {
    const auto t = fixtures::dense_near_minus_one();
    const auto a = validate_model(t);
    const auto b = validate_model(t);
    ASSERT_EQ(a.violations.size(), b.violations.size());
    EXPECT_TRUE(a.valid());
}

TEST(PthMoment, FiniteAtomsAlwaysPass) {
    JumpMeasure j;
    j.atoms.push_back({scalar(9.0), 0.5});
    EXPECT_TRUE(pth_moment_finite({scalar(0.0), mat1(0.0), j}, 0.5));
}

TEST(PthMoment, ParetoComparison) {
    EXPECT_TRUE(pth_moment_finite(fixtures::pareto(0.7), 0.5));
    EXPECT_FALSE(pth_moment_finite(fixtures::pareto(0.3), 0.5));
}

TEST(PthMoment, MonotoneInExponent) {
    for (double alpha : {0.2, 0.45, 0.7, 0.95}) {
        const auto t = fixtures::pareto(alpha);
        bool seen_true = false;
        // scanning p downwards, once finite it stays finite
        for (double p = 0.99; p > 0.0; p -= 0.07) {
            const bool finite = pth_moment_finite(t, p);
            if (seen_true) EXPECT_TRUE(finite) << "alpha " << alpha << " p " << p;
            seen_true = seen_true || finite;
            EXPECT_EQ(finite, p < alpha) << "alpha " << alpha << " p " << p;
        }
    }
}

TEST(PthMoment, UnannotatedTailThrows) {
    JumpMeasure j;
    j.densities.push_back(make_custom(scalar(1.0), [](double r) { return std::exp(-r); }, 0.5, kInf));
    EXPECT_THROW(pth_moment_finite({scalar(0.0), mat1(0.0), j}, 0.5), UnboundedSupportWithoutTailModel);
    j.densities.back().tail_override = TailModel{TailKind::exponential, 1.0};
    EXPECT_TRUE(pth_moment_finite({scalar(0.0), mat1(0.0), j}, 0.5));
}

TEST(AssetJumpFloor, Examples) {
    JumpMeasure j;
    j.atoms.push_back({scalar(-0.9), 1.0});
    j.atoms.push_back({scalar(9.0), 1.0});
    EXPECT_DOUBLE_EQ(asset_jump_floor({scalar(0.0), mat1(0.0), j}, 0), -0.9);
    EXPECT_EQ(asset_jump_floor(fixtures::merton(), 0), kInf);
    JumpMeasure box;
    box.densities.push_back(make_uniform(scalar(1.0), -0.5, 2.0, 1.0));
    EXPECT_DOUBLE_EQ(asset_jump_floor({scalar(0.0), mat1(0.0), box}, 0), -0.5);
}

TEST(AssetJumpFloor, ProjectsMultivariateSupport) {
    const auto t = fixtures::two_asset_jumps();
    // atoms give -0.4 and -0.2; the density segment r (0.5, 0.5), r in [-0.6, 0.8], gives -0.3
    EXPECT_DOUBLE_EQ(asset_jump_floor(t, 0), -0.4);
    EXPECT_DOUBLE_EQ(asset_jump_floor(t, 1), -0.3);
}

TEST(Intensity, MassesAndCompensator) {
    JumpMeasure j;
    j.atoms.push_back({scalar(0.5), 1.0});
    j.atoms.push_back({scalar(2.0), 0.25});
    j.densities.push_back(make_uniform(scalar(1.0), -0.5, 2.0, 1.0));
    const LevyTriplet t(scalar(0.0), mat1(0.0), j);
    EXPECT_NEAR(total_intensity(t), 2.25, 1e-12);
    // atoms: 0.5 (the jump of size 2 is cut off); density: int_{-0.5}^{1} r dr / 2.5 = 0.15
    EXPECT_NEAR(compensator_mean(t)(0), 0.65, 1e-10);
    EXPECT_NEAR(density_mass(make_pareto(scalar(1.0), 0.7, 0.05, 1.0)), 0.05, 1e-9);
    EXPECT_NEAR(density_mass(make_exponential(scalar(1.0), 0.3, 2.0, 0.1)), 0.3, 1e-9);
    EXPECT_NEAR(density_mass(make_gaussian(scalar(1.0), 0.4, 0.0, 0.1)), 0.4, 1e-9);
}

TEST(Intensity, InfiniteActivityDensity) {
    JumpMeasure j;
    j.densities.push_back(make_custom(scalar(1.0), [](double r) { return std::pow(r, -1.5); }, 0.0, 1.0));
    const LevyTriplet t(scalar(0.0), mat1(0.0), j);
    EXPECT_TRUE(validate_model(t).valid());
    EXPECT_EQ(total_intensity(t), kInf);
}

TEST(DensityPart, TiltsMultiplyTheProfile) {
    auto part = make_uniform(scalar(1.0), -0.5, 0.5, 1.0);
    part.tilts.push_back({2.0, -0.5});
    EXPECT_NEAR(part(0.25), 1.0 * std::pow(1.5, -0.5), 1e-15);
    EXPECT_DOUBLE_EQ(part.base(0.25), 1.0);
    EXPECT_EQ(part(0.6), 0.0);
}

TEST(DensityPart, TiltsShiftPowerTails) {
    auto part = make_pareto(scalar(1.0), 0.7, 1.0, 1.0);
    part.tilts.push_back({1.0, -0.5});
    ASSERT_TRUE(part.tail().has_value());
    EXPECT_NEAR(part.tail()->rate, 1.2, 1e-15);
}

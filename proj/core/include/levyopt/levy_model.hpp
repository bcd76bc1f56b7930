#pragma once

#include "levyopt/common.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace levyopt {

/// Truncation h(x) = x * 1{|x| <= 1}. Every drift in this library is relative to it.
Vector cutoff(const Vector& x);

/// Scalar version along a direction: h(r v) = r v 1{|r| |v| <= 1}; returns the factor multiplying v.
double cutoff_factor(double r, double direction_norm);

/// Finite point mass lambda at x (x != 0).
struct Atom {
    Vector x;
    double lambda = 0.0;
};

enum class TailKind { power, exponential };

/// Decay annotation for an unbounded density end: power means f(r) ~ |r|^{-rate-1}.
struct TailModel {
    TailKind kind = TailKind::power;
    double rate = 0.0;
};

/// Multiplicative factor (1 + slope r)^power applied to a density profile.
struct PowerTilt {
    double slope = 0.0;
    double power = 0.0;
};

/// Quadrature layout for one density part.
struct QuadratureGrid {
    int initial_intervals = 4;
    int max_depth = 15;
};

/// f(r) = intensity / (hi - lo).
struct UniformProfile {
    double intensity = 0.0;
};

/// f(r) = scale * alpha * r^{-alpha-1}; requires lo > 0.
struct ParetoProfile {
    double alpha = 0.0;
    double scale = 1.0;
};

/// f(r) = intensity * rate * exp(-rate (r - lo)); requires finite lo.
struct ExponentialProfile {
    double intensity = 0.0;
    double rate = 1.0;
};

/// f(r) = intensity * phi((r - mean) / stddev) / stddev.
struct GaussianProfile {
    double intensity = 0.0;
    double mean = 0.0;
    double stddev = 1.0;
};

/// Arbitrary density; unbounded supports need an explicit TailModel.
struct CustomProfile {
    std::function<double(double)> density;
    std::string label = "custom";
};

using DensityProfile =
    std::variant<UniformProfile, ParetoProfile, ExponentialProfile, GaussianProfile, CustomProfile>;

/// Jump density concentrated on the segment {r v : lo <= r <= hi}; hi may be +inf and lo -inf.
///
/// For d = 1 and v = 1 this is an ordinary density on an interval. Linear maps act by
/// v -> Lambda v and leave the profile in r untouched, so the family is closed under the
/// model transformation.
struct DensityPart {
    Vector direction;
    double lo = 0.0;
    double hi = 0.0;
    DensityProfile profile;
    std::vector<PowerTilt> tilts;
    std::optional<TailModel> tail_override;
    QuadratureGrid grid;

    /// Density in r, including tilts; zero outside [lo, hi].
    double operator()(double r) const;

    /// Base profile value without tilts.
    double base(double r) const;

    /// Effective tail annotation for unbounded ends (tilts shift power rates).
    std::optional<TailModel> tail() const;

    bool bounded() const { return std::isfinite(lo) && std::isfinite(hi); }
    std::string kind_name() const;
};

DensityPart make_uniform(Vector direction, double lo, double hi, double intensity);
DensityPart make_pareto(Vector direction, double alpha, double scale, double lo, double hi = kInf);
DensityPart make_exponential(Vector direction, double intensity, double rate, double lo, double hi = kInf);
DensityPart make_gaussian(Vector direction, double intensity, double mean, double stddev,
                          double lo = -kInf, double hi = kInf);
DensityPart make_custom(Vector direction, std::function<double(double)> density, double lo, double hi,
                        std::optional<TailModel> tail = std::nullopt);

/// Conservative description of supp(F): atoms and finite segment ends as points, unbounded
/// segment ends as rays.
struct SupportHull {
    std::vector<Vector> points;
    std::vector<Vector> rays;
};

struct JumpMeasure {
    std::vector<Atom> atoms;
    std::vector<DensityPart> densities;

    bool empty() const { return atoms.empty() && densities.empty(); }
    SupportHull support_hull() const;
};

struct LevyTriplet {
    Vector b;
    Matrix c;
    JumpMeasure jumps;

    LevyTriplet() = default;
    /// Checks dimensions only; structural conditions are reported by validate_model.
    LevyTriplet(Vector drift, Matrix covariance, JumpMeasure jump_measure = {});

    Eigen::Index dim() const { return b.size(); }
};

enum class ViolationKind {
    covariance_not_symmetric,
    covariance_not_psd,
    atom_at_origin,
    atom_nonpositive_weight,
    bad_density,
    levy_integrability,
    missing_tail_model,
};

struct Violation {
    ViolationKind kind;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool valid() const { return violations.empty(); }
};

ValidationReport validate_model(const LevyTriplet& triplet, const Tolerances& tol = {});

/// Whether the p-th moment of the big jumps, int_{|x|>1} |x|^p F(dx), is finite.
/// Throws UnboundedSupportWithoutTailModel when a density is unbounded and unannotated.
bool pth_moment_finite(const LevyTriplet& triplet, double p);

/// inf of x^j over supp(F); +inf without jumps.
double asset_jump_floor(const LevyTriplet& triplet, Eigen::Index j);

/// Total jump intensity F(R^d); +inf when a density part has infinite mass.
double total_intensity(const LevyTriplet& triplet, const Tolerances& tol = {});

/// Mass of one density part.
double density_mass(const DensityPart& part, const Tolerances& tol = {});

/// int h(x) F(dx); entries are +-inf/NaN when the small jumps are not summable.
Vector compensator_mean(const LevyTriplet& triplet, const Tolerances& tol = {});

}  // namespace levyopt

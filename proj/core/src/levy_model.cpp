#include "levyopt/levy_model.hpp"

#include "levyopt/quadrature.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <numbers>
#include <sstream>

namespace levyopt {

Vector cutoff(const Vector& x) {
    if (x.norm() <= 1.0) return x;
    return Vector::Zero(x.size());
}

double cutoff_factor(double r, double direction_norm) {
    return std::abs(r) * direction_norm <= 1.0 ? r : 0.0;
}

namespace {

double profile_value(const DensityProfile& profile, double lo, double hi, double r) {
    return std::visit(
        [&](const auto& prof) -> double {
            using T = std::decay_t<decltype(prof)>;
            if constexpr (std::is_same_v<T, UniformProfile>) {
                return prof.intensity / (hi - lo);
            } else if constexpr (std::is_same_v<T, ParetoProfile>) {
                return prof.scale * prof.alpha * std::pow(r, -prof.alpha - 1.0);
            } else if constexpr (std::is_same_v<T, ExponentialProfile>) {
                return prof.intensity * prof.rate * std::exp(-prof.rate * (r - lo));
            } else if constexpr (std::is_same_v<T, GaussianProfile>) {
                const double z = (r - prof.mean) / prof.stddev;
                return prof.intensity * std::exp(-0.5 * z * z) / (prof.stddev * std::sqrt(2.0 * std::numbers::pi));
            } else {
                return prof.density(r);
            }
        },
        profile);
}

double gaussian_cdf(double z) { return 0.5 * boost::math::erfc(-z / std::numbers::sqrt2); }

bool reaches_beyond_unit(const DensityPart& part) {
    const double n = part.direction.norm();
    if (n == 0.0) return false;
    return std::max(std::abs(part.lo), std::abs(part.hi)) * n > 1.0;
}

// Decade test for custom profiles that reach the origin: the mass of fn * part on
// [10^-(k+1), 10^-k] must shrink from one decade to the next, otherwise the integral diverges.
bool diverges_at_origin(const DensityPart& part, const std::function<double(double)>& fn) {
    if (!std::holds_alternative<CustomProfile>(part.profile)) return false;
    if (part.lo > 0.0 || part.hi < 0.0) return false;
    QuadratureOptions options;
    options.rel_tol = 1e-6;
    for (double side : {1.0, -1.0}) {
        if ((side > 0.0 && part.hi <= 0.0) || (side < 0.0 && part.lo >= 0.0)) continue;
        auto g = [&](double r) { return part(side * r) * fn(side * r); };
        double previous = 0.0;
        for (int k = 6; k <= 10; ++k) {
            const double decade = std::abs(integrate(g, std::pow(10.0, -k - 1), std::pow(10.0, -k), options).value);
            if (k > 6 && decade > 0.9 * previous && decade > 1e-14) return true;
            previous = decade;
        }
    }
    return false;
}

}  // namespace

double DensityPart::base(double r) const {
    if (!(r >= lo && r <= hi)) return 0.0;
    return profile_value(profile, lo, hi, r);
}

double DensityPart::operator()(double r) const {
    double value = base(r);
    if (value == 0.0) return 0.0;
    for (const auto& tilt : tilts) {
        const double u = 1.0 + tilt.slope * r;
        if (u <= 0.0) return 0.0;
        value *= std::pow(u, tilt.power);
    }
    return value;
}

std::optional<TailModel> DensityPart::tail() const {
    std::optional<TailModel> out = tail_override;
    if (!out) {
        if (const auto* pareto = std::get_if<ParetoProfile>(&profile)) {
            out = TailModel{TailKind::power, pareto->alpha};
        } else if (const auto* expo = std::get_if<ExponentialProfile>(&profile)) {
            out = TailModel{TailKind::exponential, expo->rate};
        } else if (std::holds_alternative<GaussianProfile>(profile)) {
            out = TailModel{TailKind::exponential, kInf};
        } else if (std::holds_alternative<UniformProfile>(profile)) {
            out = TailModel{TailKind::exponential, kInf};
        }
    }
    if (out && out->kind == TailKind::power) {
        for (const auto& tilt : tilts) {
            if (tilt.slope != 0.0) out->rate -= tilt.power;
        }
    }
    return out;
}

std::string DensityPart::kind_name() const {
    static const char* names[] = {"uniform", "pareto", "exponential", "gaussian", "custom"};
    return names[profile.index()];
}

DensityPart make_uniform(Vector direction, double lo, double hi, double intensity) {
    DensityPart part;
    part.direction = std::move(direction);
    part.lo = lo;
    part.hi = hi;
    part.profile = UniformProfile{intensity};
    return part;
}

DensityPart make_pareto(Vector direction, double alpha, double scale, double lo, double hi) {
    DensityPart part;
    part.direction = std::move(direction);
    part.lo = lo;
    part.hi = hi;
    part.profile = ParetoProfile{alpha, scale};
    return part;
}

DensityPart make_exponential(Vector direction, double intensity, double rate, double lo, double hi) {
    DensityPart part;
    part.direction = std::move(direction);
    part.lo = lo;
    part.hi = hi;
    part.profile = ExponentialProfile{intensity, rate};
    return part;
}

DensityPart make_gaussian(Vector direction, double intensity, double mean, double stddev, double lo, double hi) {
    DensityPart part;
    part.direction = std::move(direction);
    part.lo = lo;
    part.hi = hi;
    part.profile = GaussianProfile{intensity, mean, stddev};
    return part;
}

DensityPart make_custom(Vector direction, std::function<double(double)> density, double lo, double hi,
                        std::optional<TailModel> tail) {
    DensityPart part;
    part.direction = std::move(direction);
    part.lo = lo;
    part.hi = hi;
    part.profile = CustomProfile{std::move(density)};
    part.tail_override = tail;
    return part;
}

SupportHull JumpMeasure::support_hull() const {
    SupportHull hull;
    for (const auto& atom : atoms) hull.points.push_back(atom.x);
    for (const auto& part : densities) {
        if (std::isfinite(part.lo)) hull.points.push_back(part.lo * part.direction);
        else hull.rays.push_back(-part.direction);
        if (std::isfinite(part.hi)) hull.points.push_back(part.hi * part.direction);
        else hull.rays.push_back(part.direction);
    }
    return hull;
}

LevyTriplet::LevyTriplet(Vector drift, Matrix covariance, JumpMeasure jump_measure)
    : b(std::move(drift)), c(std::move(covariance)), jumps(std::move(jump_measure)) {
    const auto d = b.size();
    if (d == 0) throw DomainError("triplet needs at least one asset");
    if (c.rows() != d || c.cols() != d) throw DomainError("covariance must be d x d");
    for (const auto& atom : jumps.atoms) {
        if (atom.x.size() != d) throw DomainError("atom dimension differs from drift dimension");
    }
    for (const auto& part : jumps.densities) {
        if (part.direction.size() != d) throw DomainError("density direction dimension differs from drift dimension");
    }
}

ValidationReport validate_model(const LevyTriplet& triplet, const Tolerances& tol) {
    ValidationReport report;
    auto add = [&](ViolationKind kind, std::string message) { report.violations.push_back({kind, std::move(message)}); };

    const Matrix& c = triplet.c;
    const double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
    if ((c - c.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        add(ViolationKind::covariance_not_symmetric, "covariance matrix is not symmetric");
    } else {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(c, Eigen::EigenvaluesOnly);
        const double smallest = eig.eigenvalues().minCoeff();
        if (smallest < -tol.psd) {
            std::ostringstream msg;
            msg << "covariance has negative eigenvalue " << smallest;
            add(ViolationKind::covariance_not_psd, msg.str());
        }
    }

    for (std::size_t k = 0; k < triplet.jumps.atoms.size(); ++k) {
        const auto& atom = triplet.jumps.atoms[k];
        if (atom.x.norm() == 0.0) add(ViolationKind::atom_at_origin, "mass at origin (atom " + std::to_string(k) + ")");
        if (!(atom.lambda > 0.0) || !std::isfinite(atom.lambda)) {
            add(ViolationKind::atom_nonpositive_weight, "atom " + std::to_string(k) + " has non-positive intensity");
        }
    }

    for (std::size_t k = 0; k < triplet.jumps.densities.size(); ++k) {
        const auto& part = triplet.jumps.densities[k];
        const std::string tag = "density " + std::to_string(k) + " (" + part.kind_name() + ")";
        std::string problem;
        if (part.direction.norm() == 0.0) problem = "zero direction";
        else if (!(part.lo < part.hi)) problem = "empty support";
        else if (const auto* u = std::get_if<UniformProfile>(&part.profile)) {
            if (!part.bounded()) problem = "uniform density needs bounded support";
            else if (!(u->intensity >= 0.0)) problem = "negative intensity";
        } else if (const auto* pa = std::get_if<ParetoProfile>(&part.profile)) {
            if (!(part.lo > 0.0)) problem = "pareto density needs lo > 0";
            else if (!(pa->alpha > 0.0) || !(pa->scale >= 0.0)) problem = "pareto needs alpha > 0 and scale >= 0";
        } else if (const auto* ex = std::get_if<ExponentialProfile>(&part.profile)) {
            if (!std::isfinite(part.lo)) problem = "exponential density needs finite lo";
            else if (!(ex->rate > 0.0) || !(ex->intensity >= 0.0)) problem = "exponential needs rate > 0";
        } else if (const auto* ga = std::get_if<GaussianProfile>(&part.profile)) {
            if (!(ga->stddev > 0.0) || !(ga->intensity >= 0.0)) problem = "gaussian needs stddev > 0";
        } else if (!std::get<CustomProfile>(part.profile).density) {
            problem = "custom density without function";
        }
        if (!problem.empty()) {
            add(ViolationKind::bad_density, tag + ": " + problem);
            continue;
        }
        if (!part.bounded() && !part.tail()) {
            add(ViolationKind::missing_tail_model, tag + ": unbounded support without tail annotation");
            continue;
        }

        const double vn = part.direction.norm();
        auto small = [vn](double r) { return std::min(1.0, r * r * vn * vn); };
        bool integrable = false;
        try {
            if (!diverges_at_origin(part, small)) {
                const auto result = integrate_part(part, small, cutoff_breakpoints(part), {}, tol.quadrature);
                integrable = std::isfinite(result.value) && result.value < 1e12;
            }
        } catch (const std::exception&) {
        }
        if (!integrable) add(ViolationKind::levy_integrability, tag + ": integral of 1 ^ |x|^2 is not finite");
    }
    return report;
}

bool pth_moment_finite(const LevyTriplet& triplet, double p) {
    if (p <= 0.0) return true;
    for (const auto& part : triplet.jumps.densities) {
        if (!reaches_beyond_unit(part) || part.bounded()) continue;
        const auto tail = part.tail();
        if (!tail) throw UnboundedSupportWithoutTailModel("density '" + part.kind_name() + "' has unbounded support and no tail model");
        if (tail->kind == TailKind::power && !(p < tail->rate)) return false;
    }
    return true;
}

double asset_jump_floor(const LevyTriplet& triplet, Eigen::Index j) {
    double floor = kInf;
    for (const auto& atom : triplet.jumps.atoms) floor = std::min(floor, atom.x(j));
    for (const auto& part : triplet.jumps.densities) {
        const double v = part.direction(j);
        if (v == 0.0) {
            floor = std::min(floor, 0.0);
            continue;
        }
        floor = std::min(floor, v > 0.0 ? part.lo * v : part.hi * v);
    }
    return floor;
}

double density_mass(const DensityPart& part, const Tolerances& tol) {
    if (part.tilts.empty()) {
        if (const auto* u = std::get_if<UniformProfile>(&part.profile)) return u->intensity;
        if (const auto* pa = std::get_if<ParetoProfile>(&part.profile)) {
            return pa->scale * (std::pow(part.lo, -pa->alpha) - (std::isfinite(part.hi) ? std::pow(part.hi, -pa->alpha) : 0.0));
        }
        if (const auto* ex = std::get_if<ExponentialProfile>(&part.profile)) {
            return ex->intensity * -std::expm1(-ex->rate * (part.hi - part.lo));
        }
        if (const auto* ga = std::get_if<GaussianProfile>(&part.profile)) {
            return ga->intensity *
                   (gaussian_cdf((part.hi - ga->mean) / ga->stddev) - gaussian_cdf((part.lo - ga->mean) / ga->stddev));
        }
    }
    if (diverges_at_origin(part, [](double) { return 1.0; })) return kInf;
    try {
        const auto result = integrate_part(part, [](double) { return 1.0; }, {0.0}, {}, tol.quadrature);
        if (!std::isfinite(result.value) || result.value > 1e12) return kInf;
        return result.value;
    } catch (const std::exception&) {
        return kInf;
    }
}

double total_intensity(const LevyTriplet& triplet, const Tolerances& tol) {
    double total = 0.0;
    for (const auto& atom : triplet.jumps.atoms) total += atom.lambda;
    for (const auto& part : triplet.jumps.densities) total += density_mass(part, tol);
    return total;
}

Vector compensator_mean(const LevyTriplet& triplet, const Tolerances& tol) {
    Vector mean = Vector::Zero(triplet.dim());
    for (const auto& atom : triplet.jumps.atoms) mean += atom.lambda * cutoff(atom.x);
    for (const auto& part : triplet.jumps.densities) {
        const double vn = part.direction.norm();
        const auto result = integrate_part(
            part, [vn](double r) { return cutoff_factor(r, vn); }, cutoff_breakpoints(part), {}, tol.quadrature);
        mean += result.value * part.direction;
    }
    return mean;
}

}  // namespace levyopt

#include "levyopt/g_objective.hpp"

#include "levyopt/quadrature.hpp"

#include <algorithm>

namespace levyopt {

double power_increment(double u, double p) {
    if (u <= -1.0) return p > 0.0 ? -1.0 / p : -kInf;
    return std::expm1(p * std::log1p(u)) / p;
}

namespace {

constexpr double kHugeCurvature = 1e12;

// Unbounded end of a part along which s r -> +inf (or s = 0 and the end is unbounded).
struct TailEnd {
    bool upper = false;  ///< r -> +inf
    double rate = kInf;  ///< power-tail rate, +inf for lighter tails
};

std::vector<TailEnd> unbounded_ends(const DensityPart& part) {
    std::vector<TailEnd> ends;
    const auto tail = part.tail();
    const double rate = (tail && tail->kind == TailKind::power) ? tail->rate : kInf;
    if (!std::isfinite(part.hi)) ends.push_back({true, rate});
    if (!std::isfinite(part.lo)) ends.push_back({false, rate});
    return ends;
}

// Positive density mass right at r (one-sided from inside the support).
bool density_positive_at(const DensityPart& part, double r) {
    const double span = std::isfinite(part.hi - part.lo) ? part.hi - part.lo : 1.0;
    const double eps = 1e-9 * std::max(1.0, span);
    const double inside = r <= part.lo + eps ? part.lo + eps : (r >= part.hi - eps ? part.hi - eps : r);
    return part(inside) > 0.0;
}

// Singular point r0 = -1/s when it lies in [lo, hi].
std::vector<double> singular_in_support(const DensityPart& part, double s) {
    if (s == 0.0) return {};
    const double r0 = -1.0 / s;
    const double slack = 1e-12 * std::max(1.0, std::abs(r0));
    if (r0 >= part.lo - slack && r0 <= part.hi + slack) return {r0};
    return {};
}

double clamp_curvature(double value) {
    if (!std::isfinite(value) || value > kHugeCurvature) return kHugeCurvature;
    return value;
}

}  // namespace

Objective::Objective(LevyTriplet triplet, double p, Tolerances tol)
    : triplet_(std::move(triplet)), p_(p), tol_(tol), natural_(natural_constraints(triplet_)) {
    if (p_ == 0.0 || !(p_ < 1.0)) throw DomainError("power p must lie in (-inf, 0) or (0, 1)");
}

bool Objective::in_domain(const Vector& y) const { return natural_.contains(y, tol_.geometry); }

void Objective::check_domain(const Vector& y) const {
    if (y.size() != triplet_.dim()) throw DomainError("portfolio dimension differs from the model");
    if (!in_domain(y)) throw DomainError("portfolio outside the natural constraints");
}

void Objective::check_error(double error, double l1) const {
    if (error > tol_.quadrature_fail * std::max(l1, 1e-3)) {
        throw QuadratureFailure("quadrature error estimate " + std::to_string(error) + " exceeds tolerance");
    }
}

GValue Objective::value(const Vector& y) const {
    check_domain(y);
    GValue out;
    const double p = p_;
    out.value = y.dot(triplet_.b) + 0.5 * (p - 1.0) * y.dot(triplet_.c * y);

    for (const auto& atom : triplet_.jumps.atoms) {
        const double u = y.dot(atom.x);
        if (1.0 + u <= 0.0) {
            out.boundary_atom = true;
            if (p < 0.0) {
                out.value = -kInf;
                return out;
            }
        }
        out.value += atom.lambda * (power_increment(u, p) - y.dot(cutoff(atom.x)));
    }

    double l1 = 0.0;
    for (const auto& part : triplet_.jumps.densities) {
        const double s = y.dot(part.direction);
        if (s == 0.0) continue;
        if (p > 0.0) {
            for (const auto& end : unbounded_ends(part)) {
                const bool grows = end.upper ? s > 0.0 : s < 0.0;
                if (grows && end.rate <= p) {
                    out.tail_divergent = true;
                    out.value = kInf;
                    return out;
                }
            }
        }
        const auto singular = singular_in_support(part, s);
        if (!singular.empty() && p <= -1.0 && density_positive_at(part, singular.front())) {
            out.value = -kInf;
            return out;
        }
        const double vn = part.direction.norm();
        auto integrand = [s, p, vn](double r) { return power_increment(s * r, p) - s * cutoff_factor(r, vn); };
        const auto res = integrate_part(part, integrand, cutoff_breakpoints(part), singular_hints(part, s), tol_.quadrature);
        out.value += res.value;
        out.error += res.error;
        l1 += res.l1;
    }
    check_error(out.error, l1);
    return out;
}

double Objective::value_or_minus_inf(const Vector& y) const {
    if (!in_domain(y)) return -kInf;
    return value(y).value;
}

double Objective::directional(const Vector& target, const Vector& y) const {
    check_domain(y);
    check_domain(target);
    const double p = p_;
    const Vector dir = target - y;
    double total = dir.dot(triplet_.b + (p - 1.0) * (triplet_.c * y));

    for (const auto& atom : triplet_.jumps.atoms) {
        const double u = y.dot(atom.x);
        const double t = dir.dot(atom.x);
        if (1.0 + u <= 0.0) {
            if (p < 0.0) throw DomainError("objective is -inf at the base point");
            if (t > 0.0) return kInf;
            total -= atom.lambda * dir.dot(cutoff(atom.x));
            continue;
        }
        total += atom.lambda * (t * std::pow(1.0 + u, p - 1.0) - dir.dot(cutoff(atom.x)));
    }

    double error = 0.0;
    double l1 = 0.0;
    for (const auto& part : triplet_.jumps.densities) {
        const double s = y.dot(part.direction);
        const double t = dir.dot(part.direction);
        if (t == 0.0) continue;
        for (const auto& end : unbounded_ends(part)) {
            const bool grows = end.upper ? s > 0.0 : s < 0.0;
            const double exponent = (s == 0.0) ? 1.0 : (grows ? p : 0.0);
            if (s != 0.0 && !grows) continue;
            if (end.rate <= exponent) return (end.upper ? t : -t) > 0.0 ? kInf : -kInf;
        }
        const auto singular = singular_in_support(part, s);
        if (!singular.empty() && p <= 0.0 && density_positive_at(part, singular.front())) {
            if (p <= -1.0) throw DomainError("objective is -inf at the base point");
            if (t * singular.front() > 0.0) return kInf;
        }
        const double vn = part.direction.norm();
        auto integrand = [s, t, p, vn](double r) {
            const double base = 1.0 + s * r;
            const double factor = base > 0.0 ? std::pow(base, p - 1.0) : 0.0;
            return t * r * factor - t * cutoff_factor(r, vn);
        };
        const auto res = integrate_part(part, integrand, cutoff_breakpoints(part), singular_hints(part, s), tol_.quadrature);
        total += res.value;
        error += res.error;
        l1 += res.l1;
    }
    check_error(error, l1);
    return total;
}

Vector Objective::gradient(const Vector& y) const {
    const double p = p_;
    Vector grad = triplet_.b + (p - 1.0) * (triplet_.c * y);
    for (const auto& atom : triplet_.jumps.atoms) {
        const double base = 1.0 + y.dot(atom.x);
        grad += atom.lambda * (atom.x * std::pow(std::max(base, 1e-300), p - 1.0) - cutoff(atom.x));
    }
    for (const auto& part : triplet_.jumps.densities) {
        const double s = y.dot(part.direction);
        const double vn = part.direction.norm();
        auto integrand = [s, p, vn](double r) {
            const double base = 1.0 + s * r;
            const double factor = base > 0.0 ? std::pow(base, p - 1.0) : 0.0;
            return r * factor - cutoff_factor(r, vn);
        };
        const auto res = integrate_part(part, integrand, cutoff_breakpoints(part), singular_hints(part, s),
                                        tol_.quadrature);
        double value = res.value;
        if (!std::isfinite(value)) value = std::copysign(kHugeCurvature, value);
        grad += value * part.direction;
    }
    return grad;
}

Matrix Objective::hessian(const Vector& y) const {
    const double p = p_;
    Matrix curvature = triplet_.c;
    for (const auto& atom : triplet_.jumps.atoms) {
        const double base = std::max(1.0 + y.dot(atom.x), 1e-300);
        curvature += atom.lambda * clamp_curvature(std::pow(base, p - 2.0)) * atom.x * atom.x.transpose();
    }
    for (const auto& part : triplet_.jumps.densities) {
        const double s = y.dot(part.direction);
        bool divergent = false;
        for (const auto& end : unbounded_ends(part)) {
            const bool grows = end.upper ? s > 0.0 : s < 0.0;
            const double exponent = (s == 0.0) ? 2.0 : (grows ? p : 0.0);
            if ((s == 0.0 || grows) && end.rate <= exponent) divergent = true;
        }
        double value = kHugeCurvature;
        if (!divergent) {
            auto integrand = [s, p](double r) {
                const double base = 1.0 + s * r;
                if (!(base > 0.0)) return 0.0;
                // written so that far tails cannot overflow into inf * 0
                const double w = r / base;
                return w * w * std::pow(base, p);
            };
            const auto res = integrate_part(part, integrand, cutoff_breakpoints(part), singular_hints(part, s),
                                            tol_.quadrature);
            value = clamp_curvature(res.value);
        }
        curvature += value * part.direction * part.direction.transpose();
    }
    return (p - 1.0) * curvature;
}

std::vector<GValue> Objective::on_segment(const Vector& y, int n) const {
    check_domain(y);
    std::vector<GValue> out;
    if (n <= 1) {
        out.push_back(value(y));
        return out;
    }
    for (int i = 0; i < n; ++i) {
        const double lambda = static_cast<double>(i) / (n - 1);
        out.push_back(value(lambda * y));
    }
    return out;
}

GValue eval_g(const Vector& y, const LevyTriplet& triplet, double p, const Tolerances& tol) {
    return Objective(triplet, p, tol).value(y);
}

double eval_G(const Vector& target, const Vector& y, const LevyTriplet& triplet, double p, const Tolerances& tol) {
    return Objective(triplet, p, tol).directional(target, y);
}

std::vector<GValue> eval_g_on_segment(const Vector& y, const LevyTriplet& triplet, double p, int n,
                                      const Tolerances& tol) {
    return Objective(triplet, p, tol).on_segment(y, n);
}

}  // namespace levyopt

#include "levyopt/qmeasure.hpp"

#include "levyopt/g_objective.hpp"
#include "levyopt/quadrature.hpp"

#include <cmath>

namespace levyopt {

namespace {

// (1 + u)^{e} - 1 without cancellation.
double power_minus_one(double u, double e) { return std::expm1(e * std::log1p(u)); }

}  // namespace

double QMeasureReport::girsanov_jump(const Vector& x) const {
    const double u = 1.0 + pi_hat.dot(x);
    if (u <= 0.0) return kInf;
    return std::pow(u, p - 1.0);
}

LevyTriplet reweighted_triplet(const LevyTriplet& triplet, const Vector& pi_hat, double p, const Tolerances& tol) {
    const double e = p - 1.0;
    Vector b = triplet.b + e * (triplet.c * pi_hat);
    JumpMeasure jumps;
    for (const auto& atom : triplet.jumps.atoms) {
        const double u = pi_hat.dot(atom.x);
        if (1.0 + u <= 0.0) throw DomainError("portfolio loses all wealth on an atom; no equivalent reweighting");
        b += atom.lambda * power_minus_one(u, e) * cutoff(atom.x);
        jumps.atoms.push_back({atom.x, atom.lambda * std::pow(1.0 + u, e)});
    }
    for (const auto& part : triplet.jumps.densities) {
        const double s = pi_hat.dot(part.direction);
        const double vn = part.direction.norm();
        DensityPart tilted = part;
        if (s != 0.0) {
            const auto res = integrate_part(
                part, [s, e, vn](double r) { return cutoff_factor(r, vn) * power_minus_one(s * r, e); },
                cutoff_breakpoints(part), singular_hints(part, s), tol.quadrature);
            b += res.value * part.direction;
            tilted.tilts.push_back({s, e});
        }
        jumps.densities.push_back(std::move(tilted));
    }
    return LevyTriplet(b, triplet.c, std::move(jumps));
}

Vector martingale_residuals(const LevyTriplet& triplet, const Tolerances& tol) {
    Vector residual = triplet.b;
    for (const auto& atom : triplet.jumps.atoms) residual += atom.lambda * (atom.x - cutoff(atom.x));
    for (const auto& part : triplet.jumps.densities) {
        const double vn = part.direction.norm();
        if (!part.bounded()) {
            const auto tail = part.tail();
            if (!tail) {
                throw UnboundedSupportWithoutTailModel("density '" + part.kind_name() +
                                                       "' has unbounded support and no tail model");
            }
            if (tail->kind == TailKind::power && tail->rate <= 1.0) {
                throw TailDivergence("first moment of the jump measure is infinite (power tail rate " +
                                     std::to_string(tail->rate) + ")");
            }
        }
        std::vector<double> singular;
        for (const auto& tilt : part.tilts) {
            if (tilt.power < 0.0) {
                for (double r0 : singular_hints(part, tilt.slope)) singular.push_back(r0);
            }
        }
        const auto res = integrate_part(
            part, [vn](double r) { return r - cutoff_factor(r, vn); }, cutoff_breakpoints(part), singular,
            tol.quadrature);
        residual += res.value * part.direction;
    }
    return residual;
}

QMeasureReport q_optimal_exists(const LevyTriplet& triplet, double p, const PortfolioSolution& solution,
                                const ConstraintSet& C, bool consumption, const Tolerances& tol) {
    if (consumption) throw PreconditionFailed("q-optimal measure analysis requires a problem without consumption");
    if (!C.unconstrained_set()) throw PreconditionFailed("q-optimal measure analysis requires unconstrained portfolios");
    if (p == 0.0 || p >= 1.0) throw DomainError("utility exponent must lie in (-inf, 1) without 0");
    if (solution.finiteness == FinitenessVerdict::nuip_violated) {
        throw PreconditionFailed("an unbounded increasing profit exists; the dual problem is degenerate");
    }
    if (solution.finiteness == FinitenessVerdict::infinite_value || !std::isfinite(solution.g_star)) {
        throw PreconditionFailed("value function is infinite; the dual problem is degenerate");
    }
    QMeasureReport report;
    report.p = p;
    report.q = p / (p - 1.0);
    report.pi_hat = solution.pi_hat;
    report.threshold = tol.drift;
    report.girsanov_continuous = (p - 1.0) * solution.pi_hat;
    if (solution.finiteness == FinitenessVerdict::undecided) {
        report.warnings.push_back("finiteness of the value function was not decided");
    }
    if (!solution.maximizer_attained) report.warnings.push_back("optimum not attained; residual refers to an estimate");

    const Objective obj(triplet, p, tol);
    report.drift_residual = obj.directional(Vector::Zero(triplet.dim()), solution.pi_hat);
    const double gap = std::abs(report.drift_residual);
    report.exists = std::isfinite(report.drift_residual) && gap <= tol.drift;
    report.marginal = gap > 0.1 * tol.drift && gap <= 10.0 * tol.drift;
    if (report.marginal) report.warnings.push_back("marginal: drift residual is close to the threshold");
    if (report.exists) report.triplet_under_Q = reweighted_triplet(triplet, solution.pi_hat, p, tol);
    return report;
}

}  // namespace levyopt

#include "levyopt/mc_lab.hpp"

#include "levyopt/geometry.hpp"
#include "levyopt/quadrature.hpp"
#include "levyopt/rng.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace levyopt {

namespace {

constexpr std::uint32_t kBrownianStream = 0;
constexpr std::uint32_t kJumpStream = 1;
constexpr int kTableCells = 2048;

using RadialSampler = std::function<double(PhiloxStream&)>;

// Inverse-CDF table with linear interpolation inside each cell; bounded support only.
RadialSampler table_sampler(const DensityPart& part, const Tolerances& tol) {
    if (!part.bounded()) throw Error("tabulated sampling needs a bounded support");
    auto cdf = std::make_shared<std::vector<double>>(kTableCells + 1, 0.0);
    const double lo = part.lo;
    const double width = (part.hi - part.lo) / kTableCells;
    std::vector<double> singular;
    for (const auto& tilt : part.tilts) {
        for (double r0 : singular_hints(part, tilt.slope)) singular.push_back(r0);
    }
    QuadratureOptions opts;
    opts.rel_tol = tol.quadrature;
    opts.initial_intervals = 1;
    for (int k = 0; k < kTableCells; ++k) {
        const double a = lo + width * k;
        const double b = k + 1 == kTableCells ? part.hi : a + width;
        const auto cell = integrate([&part](double r) { return part(r); }, a, b, opts, singular);
        (*cdf)[static_cast<std::size_t>(k) + 1] = (*cdf)[static_cast<std::size_t>(k)] + std::max(cell.value, 0.0);
    }
    if (!(cdf->back() > 0.0)) throw Error("density part has zero mass");
    return [cdf, lo, width](PhiloxStream& rng) {
        const double target = rng.uniform() * cdf->back();
        const auto it = std::upper_bound(cdf->begin(), cdf->end(), target);
        const auto k = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(it - cdf->begin() - 1, 0, kTableCells - 1));
        const double mass = (*cdf)[k + 1] - (*cdf)[k];
        const double frac = mass > 0.0 ? (target - (*cdf)[k]) / mass : 0.5;
        return lo + width * (static_cast<double>(k) + frac);
    };
}

// Exact sampler of the untilted profile restricted to [lo, hi], or nothing for custom densities.
std::optional<RadialSampler> base_sampler(const DensityPart& part) {
    const double lo = part.lo;
    const double hi = part.hi;
    if (std::holds_alternative<UniformProfile>(part.profile)) {
        return [lo, hi](PhiloxStream& rng) { return lo + (hi - lo) * rng.uniform(); };
    }
    if (const auto* pa = std::get_if<ParetoProfile>(&part.profile)) {
        const double alpha = pa->alpha;
        const double ratio = std::isfinite(hi) ? std::pow(lo / hi, alpha) : 0.0;
        return [lo, alpha, ratio](PhiloxStream& rng) {
            return lo * std::pow(1.0 - rng.uniform() * (1.0 - ratio), -1.0 / alpha);
        };
    }
    if (const auto* ex = std::get_if<ExponentialProfile>(&part.profile)) {
        const double rate = ex->rate;
        const double span = std::expm1(-rate * (hi - lo));
        return [lo, rate, span](PhiloxStream& rng) { return lo - std::log1p(rng.uniform() * span) / rate; };
    }
    if (const auto* ga = std::get_if<GaussianProfile>(&part.profile)) {
        const boost::math::normal_distribution<double> normal(ga->mean, ga->stddev);
        const double cdf_lo = std::isfinite(lo) ? boost::math::cdf(normal, lo) : 0.0;
        const double cdf_hi = std::isfinite(hi) ? boost::math::cdf(normal, hi) : 1.0;
        return [normal, cdf_lo, cdf_hi, lo, hi](PhiloxStream& rng) {
            const double u = cdf_lo + rng.uniform() * (cdf_hi - cdf_lo);
            return std::clamp(boost::math::quantile(normal, std::clamp(u, 1e-300, 1.0 - 1e-16)), lo, hi);
        };
    }
    return std::nullopt;
}

// Supremum of the tilt product over the support (+inf when unbounded).
double tilt_supremum(const DensityPart& part) {
    double sup = 1.0;
    for (const auto& tilt : part.tilts) {
        if (tilt.slope == 0.0 || tilt.power == 0.0) continue;
        double best = 0.0;
        for (double r : {part.lo, part.hi}) {
            const double u = 1.0 + tilt.slope * r;
            double value;
            if (std::isinf(u)) {
                value = u > 0.0 ? (tilt.power > 0.0 ? kInf : 0.0) : kInf;
            } else if (u <= 0.0) {
                value = tilt.power < 0.0 ? kInf : 0.0;
            } else {
                value = std::pow(u, tilt.power);
            }
            best = std::max(best, value);
        }
        sup *= best;
    }
    return sup;
}

RadialSampler make_radial_sampler(const DensityPart& part, double tilted_mass, const Tolerances& tol) {
    auto base = base_sampler(part);
    if (part.tilts.empty() && base) return *base;
    if (base) {
        const double sup = tilt_supremum(part);
        DensityPart untilted = part;
        untilted.tilts.clear();
        const double base_mass = density_mass(untilted, tol);
        if (std::isfinite(sup) && sup > 0.0 && tilted_mass / (sup * base_mass) >= 1e-3) {
            auto tilts = part.tilts;
            auto draw = *base;
            return [draw, tilts, sup](PhiloxStream& rng) {
                for (;;) {
                    const double r = draw(rng);
                    double w = 1.0;
                    for (const auto& t : tilts) w *= std::pow(std::max(1.0 + t.slope * r, 0.0), t.power);
                    if (rng.uniform() * sup <= w) return r;
                }
            };
        }
    }
    return table_sampler(part, tol);
}

}  // namespace

class JumpSampler {
public:
    JumpSampler(const LevyTriplet& triplet, const Tolerances& tol) {
        for (const auto& atom : triplet.jumps.atoms) add(atom.lambda, atom.x, {});
        for (const auto& part : triplet.jumps.densities) {
            const double mass = density_mass(part, tol);
            if (!std::isfinite(mass)) {
                throw InfiniteActivity("density '" + part.kind_name() +
                                       "' has infinite mass; truncate the small jumps before simulating");
            }
            if (mass <= 0.0) continue;
            add(mass, part.direction, make_radial_sampler(part, mass, tol));
        }
    }

    double rate() const { return total_; }

    Vector draw(PhiloxStream& rng) const {
        const double target = rng.uniform() * total_;
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
        const auto k = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cumulative_.begin(),
                                                                          static_cast<std::ptrdiff_t>(marks_.size()) - 1));
        if (!radial_[k]) return marks_[k];
        return radial_[k](rng) * marks_[k];
    }

private:
    void add(double weight, const Vector& mark, RadialSampler radial) {
        total_ += weight;
        cumulative_.push_back(total_);
        marks_.push_back(mark);
        radial_.push_back(std::move(radial));
    }

    double total_ = 0.0;
    std::vector<double> cumulative_;
    std::vector<Vector> marks_;
    std::vector<RadialSampler> radial_;
};

PathBatch simulate_paths(const LevyTriplet& triplet, double horizon, std::size_t n_paths, int steps,
                         std::uint64_t seed, const Tolerances& tol) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("horizon must be positive and finite");
    if (steps < 1) throw DomainError("time grid needs at least one step");
    const Eigen::Index d = triplet.dim();
    PathBatch batch;
    batch.n_paths_ = n_paths;
    batch.steps_ = steps;
    batch.horizon_ = horizon;
    batch.seed_ = seed;
    batch.source_ = std::make_shared<const LevyTriplet>(triplet);
    batch.sampler_ = std::make_shared<const JumpSampler>(triplet, tol);
    batch.drift_ = triplet.b - compensator_mean(triplet, tol);
    batch.covariance_ = triplet.c;
    batch.map_ = Matrix::Identity(d, d);

    const Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (triplet.c + triplet.c.transpose()));
    const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    std::vector<Eigen::Index> kept;
    for (Eigen::Index j = 0; j < d; ++j) {
        if (eig.eigenvalues()(j) > tol.psd * scale) kept.push_back(j);
    }
    batch.factor_ = Matrix::Zero(d, static_cast<Eigen::Index>(kept.size()));
    for (std::size_t k = 0; k < kept.size(); ++k) {
        batch.factor_.col(static_cast<Eigen::Index>(k)) =
            eig.eigenvectors().col(kept[k]) * std::sqrt(eig.eigenvalues()(kept[k]));
    }
    return batch;
}

Path PathBatch::path(std::size_t index) const {
    if (index >= n_paths_) throw DomainError("path index out of range");
    const Eigen::Index d = factor_.rows();
    const Eigen::Index r = factor_.cols();
    Path out;
    out.continuous = Matrix::Zero(d, steps_ + 1);
    if (r > 0) {
        PhiloxStream rng(seed_, index, kBrownianStream);
        const double sqrt_dt = std::sqrt(horizon_ / steps_);
        Vector z(r);
        for (int k = 1; k <= steps_; ++k) {
            for (Eigen::Index j = 0; j < r; ++j) z(j) = rng.normal();
            out.continuous.col(k) = out.continuous.col(k - 1) + sqrt_dt * (factor_ * z);
        }
    }
    const double rate = sampler_->rate();
    if (rate > 0.0) {
        PhiloxStream rng(seed_, index, kJumpStream);
        double t = 0.0;
        for (;;) {
            t += rng.exponential() / rate;
            if (t > horizon_) break;
            out.jumps.push_back({t, sampler_->draw(rng)});
        }
    }
    if (!map_.isIdentity(0.0)) {
        out.continuous = map_ * out.continuous;
        for (auto& jump : out.jumps) jump.mark = map_ * jump.mark;
    }
    return out;
}

PathBatch PathBatch::mapped(const Matrix& Lambda) const {
    if (Lambda.cols() != drift_.size()) throw DomainError("map dimension differs from the batch");
    PathBatch out = *this;
    out.map_ = Lambda * map_;
    out.drift_ = Lambda * drift_;
    out.covariance_ = Lambda * covariance_ * Lambda.transpose();
    return out;
}

ConsumptionPlan ConsumptionPlan::constant(double kappa) {
    return {[kappa](double) { return kappa; }, [kappa](double t) { return kappa * t; }};
}

ConsumptionPlan ConsumptionPlan::from_curves(const SolutionCurves& curves) {
    if (!curves.consumption()) return none();
    return {[curves](double t) { return curves.kappa(t); }, [curves](double t) { return curves.cumulative_kappa(t); }};
}

PathWealth wealth_path(const PathBatch& batch, std::size_t index, const Vector& pi, const ConsumptionPlan& plan,
                       double x0) {
    if (pi.size() != batch.dim()) throw DomainError("portfolio dimension differs from the batch");
    const Path path = batch.path(index);
    const double drift = pi.dot(batch.drift()) - 0.5 * pi.dot(batch.covariance() * pi);
    PathWealth out;
    out.values.resize(batch.steps() + 1);
    double log_jumps = 0.0;
    std::size_t next = 0;
    for (int k = 0; k <= batch.steps(); ++k) {
        const double t = batch.time(k);
        while (!out.absorbed && next < path.jumps.size() && path.jumps[next].time <= t) {
            const double factor = 1.0 + pi.dot(path.jumps[next].mark);
            if (factor <= 0.0) {
                out.absorbed = true;
            } else {
                log_jumps += std::log(factor);
            }
            ++next;
        }
        if (out.absorbed) {
            out.values(k) = 0.0;
            continue;
        }
        const double consumed = plan.active() ? plan.cumulative(t) : 0.0;
        out.values(k) = x0 * std::exp(drift * t + pi.dot(path.continuous.col(k)) - consumed + log_jumps);
    }
    return out;
}

WealthPaths wealth_paths(const PathBatch& batch, const Vector& pi, const ConsumptionPlan& plan, double x0) {
    WealthPaths out;
    out.values.resize(static_cast<Eigen::Index>(batch.size()), batch.steps() + 1);
    const auto n = static_cast<std::ptrdiff_t>(batch.size());
    std::vector<char> absorbed(batch.size(), 0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto w = wealth_path(batch, static_cast<std::size_t>(i), pi, plan, x0);
        out.values.row(i) = w.values.transpose();
        absorbed[static_cast<std::size_t>(i)] = w.absorbed ? 1 : 0;
    }
    out.absorbed = static_cast<std::size_t>(std::count(absorbed.begin(), absorbed.end(), 1));
    return out;
}

UtilityEstimate sample_mean(const Vector& samples) {
    UtilityEstimate out;
    out.n_paths = static_cast<std::size_t>(samples.size());
    if (samples.size() == 0) return out;
    // Sequential sums in index order keep the result independent of thread scheduling.
    double sum = 0.0;
    for (Eigen::Index i = 0; i < samples.size(); ++i) sum += samples(i);
    out.mean = sum / static_cast<double>(samples.size());
    if (!std::isfinite(out.mean) || samples.size() < 2) return out;
    double sq = 0.0;
    for (Eigen::Index i = 0; i < samples.size(); ++i) sq += (samples(i) - out.mean) * (samples(i) - out.mean);
    const double n = static_cast<double>(samples.size());
    out.standard_error = std::sqrt(sq / (n - 1.0) / n);
    return out;
}

UtilityEstimate expected_utility(const PathBatch& batch, const Vector& pi, const ConsumptionPlan& plan, double p,
                                 double x0) {
    if (p == 0.0 || p >= 1.0) throw DomainError("utility exponent must lie in (-inf, 1) without 0");
    const auto n = static_cast<std::ptrdiff_t>(batch.size());
    Vector samples(n);
    std::vector<char> absorbed(batch.size(), 0);
    const double dt = batch.horizon() / batch.steps();
    auto utility = [p](double x) { return std::pow(x, p) / p; };
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto w = wealth_path(batch, static_cast<std::size_t>(i), pi, plan, x0);
        if (w.absorbed) absorbed[static_cast<std::size_t>(i)] = 1;
        double total = utility(w.values(batch.steps()));
        if (plan.active()) {
            double running = 0.0;
            for (int k = 0; k <= batch.steps(); ++k) {
                const double weight = (k == 0 || k == batch.steps()) ? 0.5 : 1.0;
                running += weight * utility(plan.rate(batch.time(k)) * w.values(k));
            }
            total += running * dt;
        }
        samples(i) = total;
    }
    const auto absorbed_count = static_cast<std::size_t>(std::count(absorbed.begin(), absorbed.end(), 1));
    if (p < 0.0 && absorbed_count > 0) {
        UtilityEstimate out;
        out.mean = -kInf;
        out.n_paths = batch.size();
        out.absorbed = absorbed_count;
        return out;
    }
    auto out = sample_mean(samples);
    out.absorbed = absorbed_count;
    return out;
}

Vector exponential_martingale_terminal(const PathBatch& batch, const Vector& pi, double power, const Tolerances& tol) {
    if (pi.size() != batch.dim()) throw DomainError("portfolio dimension differs from the batch");
    // Compensator on the source triplet with the pulled-back portfolio.
    const Vector pulled = batch.map().transpose() * pi;
    const LevyTriplet& source = batch.source();
    double compensator = 0.0;
    for (const auto& atom : source.jumps.atoms) {
        const double u = pulled.dot(atom.x);
        if (1.0 + u <= 0.0) throw DomainError("portfolio outside the strict natural constraints");
        compensator += atom.lambda * std::expm1(power * std::log1p(u));
    }
    for (const auto& part : source.jumps.densities) {
        const double s = pulled.dot(part.direction);
        if (s == 0.0) continue;
        const auto singular = singular_hints(part, s);
        const auto res = integrate_part(
            part, [s, power](double r) { return std::expm1(power * std::log1p(s * r)); }, {0.0}, singular,
            tol.quadrature);
        compensator += res.value;
    }
    const double T = batch.horizon();
    const double continuous_drift = -0.5 * power * power * pi.dot(batch.covariance() * pi) * T - compensator * T;
    const auto n = static_cast<std::ptrdiff_t>(batch.size());
    Vector out(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const Path path = batch.path(static_cast<std::size_t>(i));
        double log_value = continuous_drift + power * pi.dot(path.continuous.col(batch.steps()));
        bool dead = false;
        for (const auto& jump : path.jumps) {
            const double factor = 1.0 + pi.dot(jump.mark);
            if (factor <= 0.0) {
                dead = true;
                break;
            }
            log_value += power * std::log(factor);
        }
        out(i) = dead ? (power > 0.0 ? 0.0 : kInf) : std::exp(log_value);
    }
    return out;
}

namespace {

bool within(const UtilityEstimate& est, double target, double sigmas) {
    if (!std::isfinite(est.mean)) return false;
    const double gap = std::abs(est.mean - target);
    if (est.standard_error == 0.0) return gap <= 1e-12 * (1.0 + std::abs(target));
    return gap <= sigmas * est.standard_error;
}

}  // namespace

VerificationReport verification_test(const PathBatch& batch, const Vector& pi_hat, const SolutionCurves& curves,
                                     double sigmas, const Tolerances& tol) {
    const double p = curves.p();
    const double x0 = curves.x0();
    if (std::abs(batch.horizon() - curves.horizon()) > 1e-12 * curves.horizon()) {
        throw DomainError("batch horizon differs from the curves");
    }
    const auto plan = ConsumptionPlan::from_curves(curves);
    const auto n = static_cast<std::ptrdiff_t>(batch.size());
    const double dt = batch.horizon() / batch.steps();
    Vector gamma(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto w = wealth_path(batch, static_cast<std::size_t>(i), pi_hat, plan, x0);
        const int m = batch.steps();
        double value = w.absorbed && p < 0.0 ? kInf : curves.ell(batch.horizon()) * std::pow(w.values(m), p);
        if (curves.consumption() && std::isfinite(value)) {
            double running = 0.0;
            for (int k = 0; k <= m; ++k) {
                const double t = batch.time(k);
                const double weight = (k == 0 || k == m) ? 0.5 : 1.0;
                running += weight * curves.kappa(t) * curves.ell(t) * std::pow(w.values(k), p);
            }
            value += running * dt;
        }
        gamma(i) = value;
    }
    VerificationReport report;
    report.sigmas = sigmas;
    report.gamma_start = curves.ell(0.0) * std::pow(x0, p);
    report.gamma_end = sample_mean(gamma);
    report.gamma_pass = within(report.gamma_end, report.gamma_start, sigmas);
    report.psi_end = sample_mean(exponential_martingale_terminal(batch, pi_hat, p, tol));
    report.psi_pass = within(report.psi_end, 1.0, sigmas);
    return report;
}

std::vector<Vector> perturbation_panel(const Vector& pi_hat, const ConstraintSet& C, const LevyTriplet& triplet,
                                       int count, double radius) {
    static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    const Eigen::Index d = pi_hat.size();
    const NaturalConstraints natural = natural_constraints(triplet);
    const double base = radius * std::max(1.0, pi_hat.norm());
    std::vector<Vector> out;
    for (std::size_t s = 1; out.size() < static_cast<std::size_t>(count) && s < 4096; ++s) {
        Vector u(d);
        for (Eigen::Index j = 0; j < d; ++j) {
            double x = 0.0;
            double f = 1.0 / primes[j % 12];
            for (std::size_t k = s; k > 0; k /= static_cast<std::size_t>(primes[j % 12])) {
                x += f * static_cast<double>(k % static_cast<std::size_t>(primes[j % 12]));
                f /= primes[j % 12];
            }
            u(j) = 2.0 * x - 1.0;
        }
        if (u.norm() < 1e-6) continue;
        u.normalize();
        double eps = base * (0.25 + 0.75 * static_cast<double>(out.size() % 4) / 3.0);
        for (int tries = 0; tries < 40; ++tries, eps *= 0.5) {
            const Vector cand = pi_hat + eps * u;
            if (C.contains(cand, 0.0) && natural.contains_strict(cand, 0.0)) {
                out.push_back(cand);
                break;
            }
        }
    }
    return out;
}

}  // namespace levyopt

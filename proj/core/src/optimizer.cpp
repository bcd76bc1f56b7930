#include "levyopt/optimizer.hpp"

#include "levyopt/linear_program.hpp"
#include "levyopt/transform.hpp"

#include <algorithm>
#include <sstream>

namespace levyopt {

std::string to_string(Location l) {
    switch (l) {
        case Location::interior: return "interior";
        case Location::c_boundary: return "C-boundary";
        case Location::c0_boundary: return "C0-boundary";
    }
    return "interior";
}

std::string to_string(FinitenessVerdict v) {
    switch (v) {
        case FinitenessVerdict::finite: return "finite";
        case FinitenessVerdict::infinite_value: return "infinite_value";
        case FinitenessVerdict::nuip_violated: return "nuip_violated";
        case FinitenessVerdict::undecided: return "undecided";
    }
    return "undecided";
}

std::string to_string(FinitenessClass c) {
    switch (c) {
        case FinitenessClass::finite: return "finite";
        case FinitenessClass::infinite: return "infinite";
        case FinitenessClass::undecided: return "undecided";
    }
    return "undecided";
}

namespace {

constexpr double kActiveTol = 1e-7;
constexpr double kDivergenceRatio = 1e3;

ConcaveObjective as_concave(const Objective& obj) {
    return {[&obj](const Vector& y) {
                try {
                    return obj.value_or_minus_inf(y);
                } catch (const QuadratureFailure&) {
                    return -kInf;
                }
            },
            [&obj](const Vector& y) { return obj.gradient(y); }, [&obj](const Vector& y) { return obj.hessian(y); }};
}

ConvexRegion region_of(const ConvexPiece& piece, const NaturalConstraints& natural, Eigen::Index d) {
    ConvexRegion region;
    region.dim = d;
    region.linear = piece.linear;
    region.norms = piece.norms;
    for (const auto& h : natural.halfspaces) region.linear.push_back(h);
    return region;
}

double relative_slack(const LinearIneq& l, const Vector& y) {
    return (l.bound - l.a.dot(y)) / (1.0 + l.a.norm() * (1.0 + y.norm()));
}

double relative_slack(const NormIneq& n, const Vector& y) {
    const double rhs = n.radius + n.slope.dot(y);
    return (rhs - (n.P * y - n.center).norm()) / (1.0 + std::abs(rhs));
}

Location locate(const Vector& y, const ConvexPiece* piece, const NaturalConstraints& natural) {
    for (const auto& h : natural.halfspaces) {
        if (relative_slack(h, y) <= kActiveTol) return Location::c0_boundary;
    }
    if (piece) {
        for (const auto& l : piece->linear) {
            if (relative_slack(l, y) <= kActiveTol) return Location::c_boundary;
        }
        for (const auto& n : piece->norms) {
            if (relative_slack(n, y) <= kActiveTol) return Location::c_boundary;
        }
    }
    return Location::interior;
}

// Minimal-norm element of (y + N) within the piece; C0 is N-invariant and needs no check.
Vector minimal_norm_representative(const Vector& y, const ConvexPiece& piece, const Matrix& N, bool& in_C) {
    in_C = true;
    if (N.cols() == 0) return y;
    const Eigen::Index k = N.cols();
    ConstraintSet single = ConstraintSet::from_pieces(y.size(), {piece}, ConstraintKind::polyhedron);
    if (invariant_under_null_space(single, N)) return project_onto_N_perp(y, N);

    ConvexRegion region;
    region.dim = k;
    for (const auto& l : piece.linear) region.linear.push_back({N.transpose() * l.a, l.bound - l.a.dot(y)});
    for (const auto& n : piece.norms) {
        region.norms.push_back({n.P * N, n.center - n.P * y, N.transpose() * n.slope, n.radius + n.slope.dot(y)});
    }
    const Vector base = y;
    ConcaveObjective f{[base, &N](const Vector& z) { return -0.5 * (base + N * z).squaredNorm(); },
                       [base, &N](const Vector& z) { return Vector(-N.transpose() * (base + N * z)); },
                       [k](const Vector&) { return Matrix(-Matrix::Identity(k, k)); }};
    BarrierOptions opts;
    opts.regularization = 0.0;
    opts.mu_start = 1e-2;
    const auto res = maximize_over(f, region, opts);
    if (res && res->x.allFinite()) return base + N * res->x;
    in_C = false;
    return project_onto_N_perp(y, N);
}

struct PieceResult {
    Vector y;
    double value = -kInf;
    bool attained = true;
    bool in_C = true;
    int iterations = 0;
    double final_mu = 0.0;
    std::size_t constraints = 0;
    bool feasible = false;
};

PieceResult solve_piece(const Objective& obj, const ConvexPiece& piece, const Matrix& N, Closedness closed,
                        const OptimizerOptions& options) {
    const Eigen::Index d = obj.triplet().dim();
    PieceResult out;
    const ConvexRegion region = region_of(piece, obj.natural(), d);
    const auto res = maximize_over(as_concave(obj), region, options.barrier);
    if (!res) return out;
    out.feasible = true;
    out.iterations = res->iterations;
    out.final_mu = res->final_mu;
    out.constraints = region.linear.size() + region.norms.size();
    Vector y = res->x;
    double total_gain = 0.0;
    if (closed != Closedness::yes && N.cols() > 0 && res->converged) {
        // The optimum may escape along N while the value keeps creeping up; push the null
        // component outwards and re-solve from there until the gain stalls.
        const auto f = as_concave(obj);
        double gy = f.value(y);
        for (int round = 0; round < 48 && std::isfinite(gy); ++round) {
            const Vector base = project_onto_N_perp(y, N);
            const Vector drift = y - base;
            const double len = drift.norm();
            if (len <= 1e-9 * (1.0 + y.norm()) || y.norm() > 1e9) break;
            ConvexRegion capped = region;
            capped.linear.push_back({drift / len, 3.0 * len});
            BarrierOptions warm = options.barrier;
            warm.start = base + 2.0 * drift;
            warm.mu_start = 1e-9;
            warm.regularization = 0.0;
            const auto next = maximize_over(f, capped, warm);
            if (!next) break;
            const double gn = f.value(next->x);
            if (!(gn > gy + 1e-13 * (1.0 + std::abs(gy)))) break;
            total_gain += gn - gy;
            y = next->x;
            gy = gn;
            out.iterations += next->iterations;
        }
    }
    const Vector projected = project_onto_N_perp(y, N);
    const bool runaway = !res->converged || (total_gain > 1e-10 &&
                                             y.norm() > kDivergenceRatio * std::max(1.0, projected.norm()));
    if (runaway && closed != Closedness::yes) {
        out.attained = false;
        out.value = obj.value_or_minus_inf(y);
        out.y = projected;
        out.in_C = false;
        return out;
    }
    out.y = minimal_norm_representative(y, piece, N, out.in_C);
    out.value = obj.value(out.y).value;
    return out;
}

void finish(PortfolioSolution& sol, const Objective& obj, const ConvexPiece* piece) {
    const double p = obj.p();
    sol.a = p / (1.0 - p) * sol.g_star;
    sol.location = locate(sol.pi_hat, piece, obj.natural());
    try {
        sol.G_at_zero = obj.directional(Vector::Zero(sol.pi_hat.size()), sol.pi_hat);
    } catch (const Error&) {
        sol.G_at_zero = std::numeric_limits<double>::quiet_NaN();
    }
}

bool lexicographically_less(const Vector& a, const Vector& b) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a(i) < b(i) - 1e-12) return true;
        if (a(i) > b(i) + 1e-12) return false;
    }
    return false;
}

// NUIP and finiteness gate shared by the convex and non-convex drivers; returns false when solving stops here.
bool pre_checks(PortfolioSolution& sol, const LevyTriplet& triplet, const ConstraintSet& C, double p,
                const ConstraintGeometry& geo, const Tolerances& tol) {
    sol.pi_hat = Vector::Zero(triplet.dim());
    if (geo.nuip.status == NuipStatus::violated) {
        sol.finiteness = FinitenessVerdict::nuip_violated;
        sol.nuip_witness = geo.nuip.witness;
        sol.g_star = p > 0.0 ? kInf : 0.0;
        sol.maximizer_attained = false;
        sol.warnings.push_back("NuipViolated: increasing profit direction in the constraints");
        return false;
    }
    if (geo.nuip.status == NuipStatus::undecidable) {
        sol.finiteness = FinitenessVerdict::undecided;
        sol.warnings.push_back("NUIP undecidable: " + geo.nuip.reason);
    }
    if (p > 0.0) {
        const auto cls = classify_finiteness(triplet, C, p, tol);
        if (cls == FinitenessClass::infinite) {
            sol.finiteness = FinitenessVerdict::infinite_value;
            sol.g_star = kInf;
            sol.maximizer_attained = false;
            sol.warnings.push_back("value function is infinite: p-th moment fails in the transformed model");
            return false;
        }
        if (cls == FinitenessClass::undecided) sol.finiteness = FinitenessVerdict::undecided;
    }
    return true;
}

double radical_inverse(std::size_t index, int base) {
    double result = 0.0;
    double f = 1.0 / base;
    while (index > 0) {
        result += f * static_cast<double>(index % base);
        index /= base;
        f /= base;
    }
    return result;
}

// Golden-section search of a concave function on [0, hi]; -inf values count as very low.
std::pair<double, double> golden_max(const std::function<double(double)>& fn, double hi) {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = 0.0;
    double b = hi;
    double c = b - phi * (b - a);
    double d = a + phi * (b - a);
    double fc = fn(c);
    double fd = fn(d);
    for (int i = 0; i < 200 && (b - a) > 1e-12 * (1.0 + b); ++i) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = fn(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = fn(d);
        }
    }
    double best_t = 0.5 * (a + b);
    double best = fn(best_t);
    for (double t : {0.0, hi}) {
        const double v = fn(t);
        if (v > best) {
            best = v;
            best_t = t;
        }
    }
    return {best_t, best};
}

}  // namespace

PortfolioSolution maximize_convex(const LevyTriplet& triplet, const ConstraintSet& C, double p, const Tolerances& tol,
                                  const OptimizerOptions& options) {
    if (!C.convex()) throw DomainError("maximize_convex needs a convex constraint set");
    if (C.dim() != triplet.dim()) throw DomainError("constraint dimension differs from the model");
    const Objective obj(triplet, p, tol);
    const auto geo = analyze_geometry(triplet, C, tol);
    PortfolioSolution sol;
    if (!pre_checks(sol, triplet, C, p, geo, tol)) return sol;

    const auto& piece = C.pieces().front();
    const auto res = solve_piece(obj, piece, geo.null_basis, geo.projection_closed, options);
    if (!res.feasible) throw Error("empty feasible region");
    sol.pi_hat = res.y;
    sol.g_star = res.value;
    sol.maximizer_attained = res.attained;
    sol.representative_in_C = res.in_C;
    sol.iterations = res.iterations;
    sol.tolerance_achieved = res.final_mu * static_cast<double>(std::max<std::size_t>(res.constraints, 1));
    if (!res.attained) {
        sol.warnings.push_back("ProjectionNotClosed: supremum is not attained; no maximizer claimed");
    } else if (geo.projection_closed == Closedness::unknown) {
        sol.warnings.push_back("ProjectionNotClosed: closedness of the projection onto N-perp is unknown");
    }
    if (!res.in_C && res.attained) sol.warnings.push_back("representative projected onto N-perp lies outside C");
    finish(sol, obj, &piece);
    return sol;
}

C3Report check_C3(const ConstraintSet& C, const NaturalConstraints& natural) {
    C3Report report;
    if (C.star_shaped() || natural.atoms.empty()) return report;
    const Eigen::Index d = C.dim();
    auto scaled_inside = [&](const Vector& y) {
        for (double eta : {1.0 - 1e-3, 1.0 - 1e-6}) {
            if (!C.contains(eta * y, 1e-12)) return false;
        }
        return true;
    };
    const Vector zero = Vector::Zero(d);
    for (const auto& piece : C.pieces()) {
        if (piece.contains(zero, 1e-12)) continue;
        for (const auto& x : natural.atoms) {
            ConvexRegion face = region_of(piece, natural, d);
            face.linear.push_back({x, -1.0});
            const auto red = reduce_region(face);
            if (red.empty) continue;
            if (!piece.norms.empty()) {
                report.sampled = true;
                std::vector<Vector> samples{red.lift(red.interior)};
                for (Eigen::Index j = 0; j < d; ++j) {
                    for (double sign : {1.0, -1.0}) {
                        Vector obj = Vector::Zero(d);
                        obj(j) = sign;
                        BarrierOptions opts;
                        opts.regularization = 0.0;
                        if (const auto r = maximize_over(linear_objective(obj), face, opts)) samples.push_back(r->x);
                    }
                }
                for (const auto& y : samples) {
                    if (!scaled_inside(y)) {
                        report.holds = false;
                        return report;
                    }
                }
                continue;
            }
            Matrix A(static_cast<Eigen::Index>(face.linear.size()), d);
            Vector b(static_cast<Eigen::Index>(face.linear.size()));
            for (std::size_t r = 0; r < face.linear.size(); ++r) {
                A.row(static_cast<Eigen::Index>(r)) = face.linear[r].a.transpose();
                b(static_cast<Eigen::Index>(r)) = face.linear[r].bound;
            }
            for (const auto& l : piece.linear) {
                if (l.bound >= 0.0) continue;
                const auto res = solve_lp(l.a, A, b);
                if (res.status != LpStatus::optimal) continue;
                if (res.value >= l.bound - 1e-9 * (1.0 + std::abs(l.bound)) && !scaled_inside(res.x)) {
                    report.holds = false;
                    return report;
                }
            }
        }
    }
    return report;
}

FinitenessClass classify_finiteness(const LevyTriplet& triplet, const ConstraintSet& C, double p,
                                    const Tolerances& tol) {
    if (p < 0.0) return FinitenessClass::finite;
    const auto nuip = nuip_check(triplet, C, tol);
    if (nuip.status == NuipStatus::violated) return FinitenessClass::infinite;
    if (nuip.status == NuipStatus::undecidable) return FinitenessClass::undecided;
    try {
        if (pth_moment_finite(triplet, p)) return FinitenessClass::finite;
        const auto transform = build_transform(triplet, C, tol);
        return pth_moment_finite(transform.triplet, p) ? FinitenessClass::finite : FinitenessClass::infinite;
    } catch (const UnboundedSupportWithoutTailModel&) {
        return FinitenessClass::undecided;
    }
}

PortfolioSolution maximize_nonconvex(const LevyTriplet& triplet, const ConstraintSet& C, double p,
                                     const Tolerances& tol, const OptimizerOptions& options) {
    if (C.dim() != triplet.dim()) throw DomainError("constraint dimension differs from the model");
    if (C.convex()) return maximize_convex(triplet, C, p, tol, options);
    const Eigen::Index d = triplet.dim();
    const Objective obj(triplet, p, tol);
    const auto geo = analyze_geometry(triplet, C, tol);
    PortfolioSolution sol;
    if (!pre_checks(sol, triplet, C, p, geo, tol)) return sol;

    const bool star = C.star_shaped();
    bool compact = true;
    if (C.is_oracle()) {
        compact = C.compact();
    } else {
        for (const auto& piece : C.pieces()) {
            ConvexPiece with_natural = piece;
            for (const auto& h : geo.natural.halfspaces) with_natural.linear.push_back(h);
            compact = compact && piece_recession_trivial(with_natural, d);
        }
    }
    if (!star) {
        if (!compact) throw PreconditionFailed("non-convex constraints must be star-shaped or compact within C0");
        if (p > 0.0) {
            const auto c3 = check_C3(C, geo.natural);
            if (!c3.holds) throw C3Violated("condition (C3) fails: a boundary point of C0 cannot be scaled into C");
            if (c3.sampled) sol.warnings.push_back("(C3) verified on sampled points only");
        }
    }

    if (!C.is_oracle()) {
        struct Entry {
            PieceResult res;
            std::size_t piece;
        };
        std::vector<Entry> entries;
        for (std::size_t i = 0; i < C.pieces().size(); ++i) {
            auto res = solve_piece(obj, C.pieces()[i], geo.null_basis, geo.projection_closed, options);
            if (res.feasible) entries.push_back({std::move(res), i});
        }
        if (entries.empty()) throw Error("empty feasible region");
        std::size_t best = 0;
        for (std::size_t i = 1; i < entries.size(); ++i) {
            const auto& a = entries[i].res;
            const auto& b = entries[best].res;
            if (a.value > b.value + 1e-12 || (std::abs(a.value - b.value) <= 1e-12 && lexicographically_less(a.y, b.y))) {
                best = i;
            }
        }
        const auto& win = entries[best].res;
        sol.pi_hat = win.y;
        sol.g_star = win.value;
        sol.maximizer_attained = win.attained;
        sol.representative_in_C = win.in_C;
        for (const auto& e : entries) {
            sol.iterations += e.res.iterations;
            if (&e != &entries[best] && std::abs(e.res.value - win.value) <= 1e-9 && (e.res.y - win.y).norm() > 1e-6) {
                sol.alternative_argmax.push_back(e.res.y);
            }
        }
        sol.tolerance_achieved = win.final_mu * static_cast<double>(std::max<std::size_t>(win.constraints, 1));
        if (!win.attained) sol.warnings.push_back("ProjectionNotClosed: supremum is not attained; no maximizer claimed");
        finish(sol, obj, &C.pieces()[entries[best].piece]);
        return sol;
    }

    // Star-shaped oracle: radial line searches from a Halton set of directions, then pattern search.
    static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    const auto& oracle = *C.star_oracle();
    auto value = [&](const Vector& y) {
        if (!oracle.contains(y)) return -kInf;
        try {
            return obj.value_or_minus_inf(y);
        } catch (const QuadratureFailure&) {
            return -kInf;
        }
    };
    Vector best_y = Vector::Zero(d);
    double best_value = value(best_y);
    std::vector<std::pair<Vector, double>> local_maxima;
    const std::size_t starts = static_cast<std::size_t>(options.starts_per_dim) * static_cast<std::size_t>(d);
    for (std::size_t s = 1; s <= starts; ++s) {
        Vector u(d);
        for (Eigen::Index j = 0; j < d; ++j) u(j) = 2.0 * radical_inverse(s, primes[j % 12]) - 1.0;
        if (u.norm() == 0.0) continue;
        u.normalize();
        double hi = std::min(oracle.radial_bound(u), geo.natural.radial_extent(u));
        auto along = [&](double t) { return value(t * u); };
        if (!std::isfinite(hi)) {
            hi = 1.0;
            while (hi < 1e8 && along(2.0 * hi) > along(hi)) hi *= 2.0;
            hi *= 2.0;
        }
        if (!(hi > 0.0)) continue;
        auto [t, v] = golden_max(along, hi);
        Vector y = t * u;
        double h = 0.1 * std::max(1.0, y.norm());
        while (h > 1e-10) {
            bool moved = false;
            for (Eigen::Index j = 0; j < d && !moved; ++j) {
                for (double sign : {1.0, -1.0}) {
                    Vector trial = y;
                    trial(j) += sign * h;
                    const double tv = value(trial);
                    if (tv > v) {
                        y = trial;
                        v = tv;
                        moved = true;
                        break;
                    }
                }
            }
            if (!moved) h *= 0.5;
        }
        local_maxima.emplace_back(y, v);
        if (v > best_value + 1e-12 || (std::abs(v - best_value) <= 1e-12 && lexicographically_less(y, best_y))) {
            best_value = v;
            best_y = y;
        }
    }
    for (const auto& [y, v] : local_maxima) {
        if (std::abs(v - best_value) <= 1e-8 && (y - best_y).norm() > 1e-4) {
            bool seen = false;
            for (const auto& alt : sol.alternative_argmax) seen = seen || (alt - y).norm() <= 1e-4;
            if (!seen) sol.alternative_argmax.push_back(y);
        }
    }
    sol.pi_hat = best_y;
    sol.g_star = best_value;
    sol.iterations = static_cast<int>(starts);
    sol.tolerance_achieved = 1e-10;
    sol.warnings.push_back("multistart search on an oracle constraint: global optimality is heuristic");
    finish(sol, obj, nullptr);
    if (sol.location == Location::interior) {
        const double r = oracle.radial_bound(best_y.norm() > 0.0 ? Vector(best_y.normalized()) : best_y);
        if (best_y.norm() > 0.0 && std::abs(r - best_y.norm()) <= 1e-7 * (1.0 + r)) sol.location = Location::c_boundary;
    }
    return sol;
}

PortfolioSolution solve_portfolio(const LevyTriplet& triplet, const ConstraintSet& C, double p,
                                  const Tolerances& tol, const OptimizerOptions& options) {
    if (C.convex()) return maximize_convex(triplet, C, p, tol, options);
    return maximize_nonconvex(triplet, C, p, tol, options);
}

}  // namespace levyopt

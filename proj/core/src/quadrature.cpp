#include "levyopt/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>

namespace levyopt {

namespace {

using Gk = boost::math::quadrature::gauss_kronrod<double, 15>;

IntegralResult gauss_kronrod(const std::function<double(double)>& fn, double a, double b,
                             const QuadratureOptions& options) {
    IntegralResult out;
    const int pieces = std::max(1, options.initial_intervals);
    const double width = (b - a) / pieces;
    for (int i = 0; i < pieces; ++i) {
        const double lo = a + width * i;
        const double hi = (i + 1 == pieces) ? b : a + width * (i + 1);
        double err = 0.0;
        double l1 = 0.0;
        const double v = Gk::integrate(fn, lo, hi, static_cast<unsigned>(options.max_depth), options.rel_tol,
                                       &err, &l1);
        out += IntegralResult{v, err, l1};
    }
    return out;
}

IntegralResult tanh_sinh(const std::function<double(double)>& fn, double a, double b,
                         const QuadratureOptions& options) {
    thread_local boost::math::quadrature::tanh_sinh<double> rule(15);
    double err = 0.0;
    double l1 = 0.0;
    std::size_t levels = 0;
    auto f = [&fn](double x) { return fn(x); };
    const double v = rule.integrate(f, a, b, options.rel_tol, &err, &l1, &levels);
    return {v, err, l1};
}

// Finite interval; picks tanh-sinh when a singular point sits on or next to [a, b].
IntegralResult finite_piece(const std::function<double(double)>& fn, double a, double b,
                            const QuadratureOptions& options, const std::vector<double>& singular_points) {
    if (!(b > a)) return {};
    const double len = b - a;
    // tanh-sinh only tames end-point blow-ups, so split at interior singularities
    for (double s : singular_points) {
        if (s > a && s < b) {
            IntegralResult out = finite_piece(fn, a, s, options, singular_points);
            out += finite_piece(fn, s, b, options, singular_points);
            return out;
        }
    }
    for (double s : singular_points) {
        if (s == a || s == b) return tanh_sinh(fn, a, b, options);
        // Just outside an end: integrate in log distance from s, which flattens the blow-up.
        const double gap = s < a ? a - s : s - b;
        if (gap > 0.05 * len) continue;
        const double sign = s < a ? 1.0 : -1.0;
        auto mapped = [&fn, s, sign](double u) {
            const double dist = std::exp(u);
            return fn(s + sign * dist) * dist;
        };
        const double far = s < a ? b - s : s - a;
        // 1 + slope r loses digits this close to s, so deep refinement only chases rounding noise.
        QuadratureOptions shallow = options;
        shallow.max_depth = std::min(options.max_depth, 6);
        shallow.initial_intervals = std::max(options.initial_intervals, 8);
        return gauss_kronrod(mapped, std::log(gap), std::log(far), shallow);
    }
    return gauss_kronrod(fn, a, b, options);
}

// [anchor, inf) with anchor > 0 via r = anchor e^u.
IntegralResult upper_tail(const std::function<double(double)>& fn, double anchor, const QuadratureOptions& options) {
    auto mapped = [&](double u) {
        const double r = anchor * std::exp(u);
        if (!std::isfinite(r)) return 0.0;
        return fn(r) * r;
    };
    double err = 0.0;
    double l1 = 0.0;
    const double v = Gk::integrate(mapped, 0.0, std::numeric_limits<double>::infinity(),
                                   static_cast<unsigned>(options.max_depth), options.rel_tol, &err, &l1);
    return {v, err, l1};
}

}  // namespace

IntegralResult integrate(const std::function<double(double)>& fn, double a, double b,
                         const QuadratureOptions& options, const std::vector<double>& singular_points) {
    if (!(b > a)) return {};
    if (std::isfinite(a) && std::isfinite(b)) return finite_piece(fn, a, b, options, singular_points);

    if (std::isinf(a) && std::isinf(b)) {
        IntegralResult out = integrate(fn, a, 0.0, options, singular_points);
        out += integrate(fn, 0.0, b, options, singular_points);
        return out;
    }
    if (std::isinf(b)) {
        double anchor = std::max(1.0, a + 1.0);
        for (double s : singular_points) {
            if (std::isfinite(s) && s >= a) anchor = std::max(anchor, s + 1.0);
        }
        IntegralResult out = finite_piece(fn, a, anchor, options, singular_points);
        out += upper_tail(fn, anchor, options);
        return out;
    }
    // (-inf, b]: mirror.
    auto mirrored = [&](double r) { return fn(-r); };
    std::vector<double> mirrored_singular;
    mirrored_singular.reserve(singular_points.size());
    for (double s : singular_points) mirrored_singular.push_back(-s);
    return integrate(mirrored, -b, -a, options, mirrored_singular);
}

std::vector<double> cutoff_breakpoints(const DensityPart& part) {
    const double n = part.direction.norm();
    if (n == 0.0) return {};
    return {-1.0 / n, 1.0 / n};
}

std::vector<double> singular_hints(const DensityPart& part, double slope) {
    if (slope == 0.0) return {};
    const double r0 = -1.0 / slope;
    double span = part.hi - part.lo;
    if (!std::isfinite(span)) span = std::max(1.0, std::isfinite(part.lo) ? std::abs(part.lo) : std::abs(part.hi));
    const double reach = 0.05 * span;
    if (r0 >= part.lo - reach && r0 <= part.hi + reach) return {r0};
    return {};
}

IntegralResult integrate_part(const DensityPart& part, const std::function<double(double)>& fn,
                              std::vector<double> breakpoints, const std::vector<double>& singular_points,
                              double rel_tol) {
    for (double s : singular_points) breakpoints.push_back(s);
    std::vector<double> cuts{part.lo};
    for (double x : breakpoints) {
        if (std::isfinite(x) && x > part.lo && x < part.hi) cuts.push_back(x);
    }
    cuts.push_back(part.hi);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    QuadratureOptions options;
    options.rel_tol = rel_tol;
    options.max_depth = part.grid.max_depth;
    options.initial_intervals = part.grid.initial_intervals;

    auto integrand = [&](double r) {
        const double w = part(r);
        if (w == 0.0) return 0.0;
        return w * fn(r);
    };
    IntegralResult total;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        total += integrate(integrand, cuts[i], cuts[i + 1], options, singular_points);
    }
    return total;
}

}  // namespace levyopt

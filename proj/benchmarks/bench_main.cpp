#include "levyopt/g_objective.hpp"
#include "levyopt/mc_lab.hpp"
#include "levyopt/optimizer.hpp"

#include <benchmark/benchmark.h>

using namespace levyopt;

namespace {

Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

LevyTriplet atoms_only() {
    JumpMeasure j;
    j.atoms.push_back({vec2(0.3, -0.2), 0.6});
    j.atoms.push_back({vec2(-0.4, 0.1), 0.4});
    Matrix c(2, 2);
    c << 0.04, 0.01, 0.01, 0.09;
    return {vec2(0.07, 0.05), c, j};
}

LevyTriplet with_density() {
    auto t = atoms_only();
    t.jumps.densities.push_back(make_uniform(vec2(0.5, 0.5), -0.6, 0.8, 0.7));
    return t;
}

LevyTriplet heavy_tail() {
    JumpMeasure j;
    j.densities.push_back(make_pareto(Vector::Ones(1), 0.7, 0.05, 1.0));
    return {Vector::Constant(1, 0.05), Matrix::Constant(1, 1, 0.04), j};
}

void BM_EvalAtoms(benchmark::State& state) {
    const Objective obj(atoms_only(), 0.5);
    const Vector y = vec2(0.4, -0.3);
    for (auto _ : state) benchmark::DoNotOptimize(obj.value(y).value);
}
BENCHMARK(BM_EvalAtoms);

void BM_EvalDensity(benchmark::State& state) {
    const Objective obj(with_density(), 0.5);
    const Vector y = vec2(0.4, -0.3);
    for (auto _ : state) benchmark::DoNotOptimize(obj.value(y).value);
}
BENCHMARK(BM_EvalDensity);

void BM_EvalHeavyTail(benchmark::State& state) {
    const Objective obj(heavy_tail(), 0.5);
    const Vector y = Vector::Constant(1, 3.0);
    for (auto _ : state) benchmark::DoNotOptimize(obj.value(y).value);
}
BENCHMARK(BM_EvalHeavyTail);

void BM_SolveUnconstrained(benchmark::State& state) {
    const auto t = with_density();
    for (auto _ : state) benchmark::DoNotOptimize(solve_portfolio(t, ConstraintSet::unconstrained(2), 0.5).g_star);
}
BENCHMARK(BM_SolveUnconstrained)->Unit(benchmark::kMillisecond);

void BM_SolveBox(benchmark::State& state) {
    const auto t = with_density();
    const auto C = ConstraintSet::box(vec2(0, 0), vec2(1, 1));
    for (auto _ : state) benchmark::DoNotOptimize(solve_portfolio(t, C, -1.0).g_star);
}
BENCHMARK(BM_SolveBox)->Unit(benchmark::kMillisecond);

void BM_ExpectedUtility(benchmark::State& state) {
    const auto t = with_density();
    const auto batch = simulate_paths(t, 1.0, static_cast<std::size_t>(state.range(0)), 50, 7);
    const Vector pi = vec2(0.5, 0.2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(expected_utility(batch, pi, ConsumptionPlan::none(), 0.5, 1.0).mean);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ExpectedUtility)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();

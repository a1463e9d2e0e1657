#include <benchmark/benchmark.h>

#include "resonette/grushin.hpp"
#include "resonette/linalg.hpp"
#include "resonette/operator.hpp"

using namespace resonette;

namespace {

struct Setup {
    double h;
    PotentialSpec v = make_potential("well_in_island");
    std::shared_ptr<const DistortionProfile> profile;
    std::shared_ptr<const AnalyticApproximation> vmu;
    GridSpec grid;

    explicit Setup(double h_) : h(h_), profile(profile_for(h_, 1.1, 1.0)), vmu(build_approximation(v, 0.1, {})) {
        grid = auto_grid(h, profile->linear_radius(), Geometry::half_even, 0.2, 3.0, 4);
    }
    DiscretizedOperator op() const { return assemble_distorted(*vmu, DistortionMap(profile, 0.1), h, grid); }
};

double planck(const benchmark::State& state) { return state.range(0) / 1000.0; }

}  // namespace

static void BM_BuildApproximation(benchmark::State& state) {
    const PotentialSpec v = make_potential("well_in_island");
    const double mu = state.range(0) / 1000.0;
    for (auto _ : state) benchmark::DoNotOptimize(build_approximation(v, mu, {}));
}
BENCHMARK(BM_BuildApproximation)->Arg(100)->Arg(50)->Arg(25)->Unit(benchmark::kMillisecond);

static void BM_Assemble(benchmark::State& state) {
    const Setup s(planck(state));
    for (auto _ : state) benchmark::DoNotOptimize(s.op());
    state.counters["n"] = s.grid.n_points;
}
BENCHMARK(BM_Assemble)->Arg(120)->Arg(90)->Arg(50)->Unit(benchmark::kMillisecond);

static void BM_Eigenvalues(benchmark::State& state) {
    const Setup s(planck(state));
    const auto op = s.op();
    for (auto _ : state) benchmark::DoNotOptimize(eigenvalues(op.matrix));
    state.counters["n"] = s.grid.n_points;
}
BENCHMARK(BM_Eigenvalues)->Arg(120)->Arg(90)->Arg(50)->Unit(benchmark::kMillisecond);

static void BM_GrushinDeterminant(benchmark::State& state) {
    const Setup s(planck(state));
    const auto ref = assemble_reference(s.op(), reference_options_for(s.v, 1.0, 1.1));
    const GrushinFamily fam(ref);
    cplx z(1.05, 0.001);
    for (auto _ : state) {
        benchmark::DoNotOptimize(fam.determinant(z));
        z += cplx(1e-6, 0.0);
    }
    state.counters["rank"] = fam.rank();
}
BENCHMARK(BM_GrushinDeterminant)->Arg(120)->Arg(90)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();

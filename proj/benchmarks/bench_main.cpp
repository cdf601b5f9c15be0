#include <benchmark/benchmark.h>

#include "mce/problems.hpp"

using namespace mce;

namespace {

std::shared_ptr<const SubdividedMesh> square(int n) {
    return std::make_shared<const SubdividedMesh>(subdivide(generate_unit_square_mesh(n)));
}

void BM_Subdivide(benchmark::State& state) {
    const MacroMesh mesh = generate_unit_square_mesh(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(subdivide(mesh));
    state.SetItemsProcessed(state.iterations() * mesh.num_triangles());
}
BENCHMARK(BM_Subdivide)->Arg(16)->Arg(64);

void BM_BuildSpace(benchmark::State& state) {
    const auto sub = square(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(build_space(sub, BoundarySpec::uniform(ConstraintMode::FullDirichlet)));
    state.SetItemsProcessed(state.iterations() * sub->mesh().num_edges());
}
BENCHMARK(BM_BuildSpace)->Arg(16)->Arg(64);

void BM_AssembleBrinkman(benchmark::State& state) {
    const FESpace space = build_space(square(static_cast<int>(state.range(0))),
                                      BoundarySpec::uniform(ConstraintMode::FullDirichlet));
    const ManufacturedCase c = case_stokes();
    AssemblyOptions opts;
    opts.threads = static_cast<int>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(assemble_brinkman(space, c.coefficients, opts));
    state.SetItemsProcessed(state.iterations() * space.mesh().num_triangles());
}
BENCHMARK(BM_AssembleBrinkman)->Args({32, 1})->Args({64, 1})->Args({64, 4})->Unit(benchmark::kMillisecond);

void BM_SolveStokes(benchmark::State& state) {
    const FESpace space = build_space(square(static_cast<int>(state.range(0))),
                                      BoundarySpec::uniform(ConstraintMode::FullDirichlet));
    const SaddleSystem sys = assemble_brinkman(space, case_stokes().coefficients);
    for (auto _ : state) benchmark::DoNotOptimize(solve(sys));
    state.counters["dofs"] = sys.size();
}
BENCHMARK(BM_SolveStokes)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_CooksTip(benchmark::State& state) {
    const CooksSetup setup = case_cooks(0.49999, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(cooks_tip_displacement(setup, true));
}
BENCHMARK(BM_CooksTip)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

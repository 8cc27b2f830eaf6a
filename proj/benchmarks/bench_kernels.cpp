#include "porous/conformal.hpp"
#include "porous/correction.hpp"
#include "porous/solver.hpp"

#include <benchmark/benchmark.h>

using namespace porous;

namespace {

CorrectionField make_field(double eps, double alpha) {
    InclusionShape disk = make_shape(ShapeKind::disk);
    double d = std::pow(eps, alpha);
    PorousLayout lay = make_layout(disk, eps, d, LayoutKind::segment);
    return CorrectionField(lay, build_map(disk),
                           build_cutoff(CutoffKind::segment_case, eps, d, disk),
                           SourceVorticity::circular_patch({0.5, 1.5}, 0.25, 1.0));
}

} // namespace

static void BM_PlaneBiotSavart(benchmark::State& state) {
    SourceVorticity f = SourceVorticity::gaussian_bump({0, 0}, 0.4, 1.0, 1.6);
    Vec2 x{0.9, 0.3};
    for (auto _ : state) benchmark::DoNotOptimize(biot_savart_plane(f, x, 1e-6));
}
BENCHMARK(BM_PlaneBiotSavart);

static void BM_ExteriorVelocity(benchmark::State& state) {
    InclusionShape ell = make_shape(ShapeKind::ellipse, {.ellipse_b = 0.5});
    ConformalMap map = build_map(ell);
    SourceVorticity f = SourceVorticity::circular_patch({3, 0}, 0.25, 1.0);
    Vec2 x{1.4, 0.2};
    for (auto _ : state) benchmark::DoNotOptimize(biot_savart_exterior(map, f, x));
}
BENCHMARK(BM_ExteriorVelocity);

static void BM_LaurentForward(benchmark::State& state) {
    InclusionShape sup = make_shape(ShapeKind::superdisk, {.gamma = 2.0});
    ConformalMap map = build_map(sup, static_cast<int>(state.range(0)));
    Complex z{1.3, 0.7};
    for (auto _ : state) benchmark::DoNotOptimize(map.forward(z));
}
BENCHMARK(BM_LaurentForward)->Arg(96)->Arg(256);

static void BM_CellDiscrepancy(benchmark::State& state) {
    CorrectionField field = make_field(0.05, 2.5);
    for (auto _ : state) benchmark::DoNotOptimize(field.discrepancy_l2());
}
BENCHMARK(BM_CellDiscrepancy)->Unit(benchmark::kMillisecond);

static void BM_PanelAssemblySolve(benchmark::State& state) {
    InclusionShape disk = make_shape(ShapeKind::disk);
    PorousLayout lay = make_layout(disk, 0.1, 0.0125, LayoutKind::segment);
    for (auto _ : state) {
        PanelSystem panels = assemble_panels(lay, static_cast<int>(state.range(0)));
        panels.solve([](Vec2) { return Vec2{1.0, 0.0}; });
        benchmark::DoNotOptimize(panels.last_residual());
    }
}
BENCHMARK(BM_PanelAssemblySolve)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_RK4Step(benchmark::State& state) {
    InclusionShape disk = make_shape(ShapeKind::disk);
    PorousLayout lay = make_layout(disk, 0.1, 0.0125, LayoutKind::segment);
    PanelSystem panels = assemble_panels(lay, 48);
    VortexState s;
    s.blobs.push_back({{0.6, 0.4}, 1.0, 5e-3});
    s.blobs.push_back({{0.4, 0.4}, -1.0, 5e-3});
    for (auto _ : state) {
        VortexState next = step_rk4(s, panels, 1e-3);
        benchmark::DoNotOptimize(next.time);
    }
}
BENCHMARK(BM_RK4Step)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

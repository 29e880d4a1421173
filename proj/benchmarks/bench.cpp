#include <benchmark/benchmark.h>

#include "softmesh/chamfer.hpp"
#include "softmesh/dataset.hpp"
#include "softmesh/remesh.hpp"
#include "softmesh/shapes.hpp"
#include "softmesh/splat.hpp"
#include "softmesh/tet_grid.hpp"

namespace sm = softmesh;

namespace {

// icosphere scene under one camera, the renderer's bread-and-butter load
struct RenderScene {
    sm::Mesh mesh;
    sm::LayerSet layers;
    sm::Camera cam;
    sm::RenderOptions opts;

    RenderScene(int subdivisions, int n_layers, int res) {
        mesh = sm::make_icosphere({0, 0, 0}, 0.8, subdivisions);
        mesh.colors.assign(mesh.vertices.size(), sm::Vec3{0.2, -0.1, 0.4});
        sm::Rng rng(42);
        layers = sm::sample_layers(mesh, n_layers, 0.08, rng);
        sm::compute_alphas(layers, sm::alpha_params_for_beta(0.6));
        cam = sm::make_look_at({2.0, 0.3, 0.4}, {0, 0, 0}, {0, 0, 1}, res, res, res, res,
                               0.05, 10.0);
        opts.threads = 1;
    }
};

void BM_RenderForward(benchmark::State& state) {
    RenderScene s(static_cast<int>(state.range(0)), 5, 128);
    for (auto _ : state) {
        sm::RenderOutput out = sm::render(s.layers, s.cam, s.opts);
        benchmark::DoNotOptimize(out.color.data.data());
    }
}
BENCHMARK(BM_RenderForward)->Arg(2)->Arg(3);

void BM_RenderBackward(benchmark::State& state) {
    RenderScene s(static_cast<int>(state.range(0)), 5, 128);
    sm::ForwardCache cache;
    sm::RenderOutput out = sm::render(s.layers, s.cam, s.opts, &cache);
    sm::Image d_color(out.color.width, out.color.height, 3);
    for (double& v : d_color.data) v = 1e-4;
    sm::AlphaParams params = sm::alpha_params_for_beta(0.6);
    for (auto _ : state) {
        sm::GradientBuffer gb = sm::render_backward(cache, s.layers, params, s.opts, d_color);
        benchmark::DoNotOptimize(gb.d_positions.data());
    }
}
BENCHMARK(BM_RenderBackward)->Arg(2)->Arg(3);

void BM_OracleRender(benchmark::State& state) {
    RenderScene s(2, 5, 64);
    for (auto _ : state) {
        sm::RenderOutput out = sm::oracle_render(s.layers, s.cam, s.opts);
        benchmark::DoNotOptimize(out.color.data.data());
    }
}
BENCHMARK(BM_OracleRender);

void BM_MarchingTets(benchmark::State& state) {
    sm::TetGrid grid = sm::build_grid(static_cast<int>(state.range(0)), {-1, -1, -1}, {1, 1, 1});
    sm::init_sphere_sdf(grid, {0, 0, 0}, 0.7);
    for (auto _ : state) {
        sm::Extraction ext = sm::marching_tets(grid);
        benchmark::DoNotOptimize(ext.mesh.vertices.data());
    }
}
BENCHMARK(BM_MarchingTets)->Arg(24)->Arg(48);

void BM_RemeshStep(benchmark::State& state) {
    sm::Mesh base = sm::make_icosphere({0, 0, 0}, 0.8, 3);
    sm::RemeshConfig cfg;
    cfg.target_edge = 0.08;
    for (auto _ : state) {
        sm::Mesh m = base;
        for (int i = 0; i < 3; ++i) m = sm::remesh_step(m, cfg);
        benchmark::DoNotOptimize(m.vertices.data());
    }
}
BENCHMARK(BM_RemeshStep);

void BM_Chamfer(benchmark::State& state) {
    sm::Mesh a = sm::make_icosphere({0, 0, 0}, 0.8, 3);
    sm::Mesh b = sm::make_blob({0, 0, 0}, 0.7, 0.15, 3, 9);
    sm::Rng ra(1), rb(2);
    auto pa = sm::sample_surface(a, static_cast<int>(state.range(0)), ra);
    auto pb = sm::sample_surface(b, static_cast<int>(state.range(0)), rb);
    for (auto _ : state) {
        double d = sm::chamfer(pa, pb);
        benchmark::DoNotOptimize(d);
    }
}
BENCHMARK(BM_Chamfer)->Arg(2000)->Arg(20000);

}  // namespace

BENCHMARK_MAIN();

#pragma once

#include <utility>
#include <vector>

#include "softmesh/camera.hpp"
#include "softmesh/constants.hpp"
#include "softmesh/image.hpp"
#include "softmesh/soften.hpp"

namespace softmesh {

struct RenderOptions {
    int tile_size = kTileSize;
    int frag_cap = kFragCap;
    double early_term = kEarlyTermT;    // transmittance cutoff
    bool gradient_check_mode = false;   // disables early termination
    int threads = 0;                    // 0 = hardware concurrency
};

struct RenderOutput {
    Image color;           // 3 channels
    Image opacity;         // accumulated alpha*T
    Image transmittance;   // residual T after the last composited fragment
    Image frag_count;      // fragments entering composite (after the cap)
    long near_culled = 0;  // triangles crossing the near plane, culled
};

// One retained fragment. Barycentrics are frozen here on purpose: screen-space
// derivatives are not a gradient path, so recompositing against the cache is
// the renderer's exact differentiable function.
struct CachedFragment {
    int layer;
    int face;
    double z;
    double w[3];
};

struct ForwardCache {
    int width = 0, height = 0;
    std::vector<int> offsets;            // CSR over row-major pixels, size W*H+1
    std::vector<CachedFragment> frags;   // composite order within each pixel
};

struct TileBins {
    int tiles_x = 0, tiles_y = 0;
    std::vector<std::vector<std::pair<int, int>>> tris;  // per tile: (layer, face)
    long near_culled = 0;
};

// A triangle lands in every tile its clipped screen AABB overlaps. Culls
// degenerate faces and any triangle with a vertex at or behind the near plane.
TileBins bin_triangles(const LayerSet& layers, const Camera& cam, const RenderOptions& opts);

// --- compositing core, shared by the tiled renderer, the oracle, and tests ---

struct FragAC {
    double alpha;
    Vec3 color;
};

struct CompositeResult {
    Vec3 color{0, 0, 0};
    double opacity = 0.0;
    double transmittance = 1.0;
    std::vector<double> weights;   // alpha_i * T_i, zero past early termination
};

CompositeResult composite(const std::vector<FragAC>& frags, const RenderOptions& opts);

struct FragGrad {
    double d_alpha = 0.0;
    Vec3 d_color{0, 0, 0};
};

std::vector<FragGrad> composite_backward(const std::vector<FragAC>& frags,
                                         const RenderOptions& opts, const Vec3& dL_dcolor,
                                         double dL_dopacity);

// --- full pipeline ---

RenderOutput render(const LayerSet& layers, const Camera& cam, const RenderOptions& opts,
                    ForwardCache* cache = nullptr);

// Interpolate + composite against cached fragment lists with the current
// alphas/colors; bit-identical to the render that built the cache.
RenderOutput composite_from_cache(const ForwardCache& cache, const LayerSet& layers,
                                  const RenderOptions& opts);

struct GradientBuffer {
    std::vector<Vec3> d_positions;             // per base vertex
    std::vector<Vec3> d_colors;                // per base vertex, raw-color space
    double d_b = 0.0;
    std::vector<std::vector<double>> d_alpha;  // [layer][vertex] intermediate
};

// Analytic backward through compositing, interpolation, the sdf->alpha map,
// and the stop-gradient signed distance. dL_dopacity may be null.
GradientBuffer render_backward(const ForwardCache& cache, const LayerSet& layers,
                               const AlphaParams& params, const RenderOptions& opts,
                               const Image& dL_dcolor, const Image* dL_dopacity = nullptr);

// Brute-force reference: exact ray-triangle intersection of every pixel ray
// against every triangle, same culling and compositing as the tiled path.
RenderOutput oracle_render(const LayerSet& layers, const Camera& cam,
                           const RenderOptions& opts);

// True when both caches list the same (layer, face) fragments per pixel.
bool same_fragment_sets(const ForwardCache& a, const ForwardCache& b);

}  // namespace softmesh

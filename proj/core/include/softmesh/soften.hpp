#pragma once

#include <cstdint>
#include <vector>

#include "softmesh/mesh.hpp"
#include "softmesh/rng.hpp"

namespace softmesh {

// Learnable sharpness of the sdf->alpha map, kept positive via softplus.
struct AlphaParams {
    double b = 0.0;
};

double beta_of(const AlphaParams& p);    // kBetaMin + ln(1 + e^b)
double dbeta_db(const AlphaParams& p);   // sigmoid(b)
AlphaParams alpha_params_for_beta(double beta);  // inverse of beta_of; beta > floor

// The softened multi-layer mesh. All layers share the base topology; layer
// vertices are a detached snapshot (the stop-gradient convention), so moving
// base vertices later changes signed distances but never layer geometry.
struct LayerSet {
    const Mesh* base = nullptr;
    int num_layers = 0;
    std::vector<double> offsets;                     // per layer, meters
    std::vector<Vec3> normals;                       // per base vertex, detached
    std::vector<uint8_t> normal_flagged;
    std::vector<std::vector<Vec3>> layer_vertices;   // [layer][vertex]
    std::vector<std::vector<double>> signed_dists;   // [layer][vertex]
    std::vector<std::vector<double>> alphas;         // [layer][vertex], filled by compute_alphas
    std::vector<Vec3> display_colors;                // squashed base colors, shared by layers
    std::vector<uint8_t> face_degenerate;            // per base face
};

// Stratified per-layer draws covering [-delta, delta], clamped away from zero.
std::vector<double> draw_offsets(int n, double delta, Rng& rng);

// Deterministic core: build layers from explicit offsets.
LayerSet make_layer_set(const Mesh& base, const std::vector<double>& offsets);

LayerSet sample_layers(const Mesh& base, int n, double delta, Rng& rng);

// Recompute signed distances against moved base positions with layer vertices
// frozen: s = sign(d) * |v_layer - p|. With the original positions this
// reproduces s = d to rounding.
void refresh_signed_dists(LayerSet& ls, const std::vector<Vec3>& base_positions);

// dL/dv0 = sum over layers of dL/ds * (-n), normals detached.
std::vector<Vec3> signed_distance_backward(const LayerSet& ls,
                                           const std::vector<std::vector<double>>& dL_ds);

double sdf_to_alpha(double s, const AlphaParams& p);

struct AlphaGrad {
    double d_s = 0.0;
    double d_b = 0.0;
};
// Zero in the clamped region.
AlphaGrad sdf_to_alpha_backward(double s, const AlphaParams& p, double dL_dalpha);

void compute_alphas(LayerSet& ls, const AlphaParams& p);

// Squash raw colors into display space (used after color updates).
void refresh_display_colors(LayerSet& ls, const std::vector<Vec3>& raw_colors);

}  // namespace softmesh

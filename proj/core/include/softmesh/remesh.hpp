#pragma once

#include <vector>

#include "softmesh/mesh.hpp"

namespace softmesh {

struct RemeshConfig {
    double target_edge = 0.05;        // meters
    double split_factor = 4.0 / 3.0;
    double collapse_factor = 4.0 / 5.0;
    double smooth_lambda = 0.1;
    int max_ops_per_call = 1 << 30;   // split+collapse+flip budget
};

struct RemeshStats {
    int splits = 0, collapses = 0, flips = 0;
};

// Per-vertex arrays that must follow vertex identity through surgery (colors
// live in the mesh itself). New vertices average their edge endpoints;
// collapse merges by average. Counters reset on split, keep the max on
// collapse.
struct RemeshAttachments {
    std::vector<std::vector<Vec3>*> vec3_arrays;
    std::vector<std::vector<long>*> counter_arrays;
};

// One split -> collapse -> flip -> tangential-smooth pass toward isotropic
// triangles at cfg.target_edge. Throws on non-manifold input.
Mesh remesh_step(const Mesh& mesh, const RemeshConfig& cfg,
                 const RemeshAttachments& att = {}, RemeshStats* stats = nullptr);

struct MeshQuality {
    int vertices = 0, edges = 0, faces = 0;
    int euler = 0;
    int boundary_edges = 0;
    bool watertight_manifold = false;
    double edge_min = 0.0, edge_mean = 0.0, edge_max = 0.0;
    double quality_min = 0.0, quality_mean = 0.0;  // 2*inradius/circumradius
    double volume = 0.0;                            // signed, closed meshes
    // fraction of edges with length in [lo, hi] if requested via report args
    double edge_fraction_in_band = 0.0;
};

MeshQuality mesh_quality_report(const Mesh& mesh, double band_lo = 0.0, double band_hi = 0.0);

std::string quality_csv_header();
std::string quality_csv_row(const MeshQuality& q);

}  // namespace softmesh

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "softmesh/mesh.hpp"

namespace softmesh {

// Regular lattice split into 6 tets per cube (Freudenthal, all sharing the
// cube's main diagonal), with per-vertex optimizable SDF and raw colors.
struct TetGrid {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 4>> tets;   // positively oriented
    std::vector<double> sdf;
    std::vector<Vec3> colors;               // raw, squashed at render time
    int resolution = 0;                     // cells per axis
    Vec3 bbox_min, bbox_max;

    double cell_size() const { return (bbox_max.x - bbox_min.x) / resolution; }
};

// One record per extracted mesh vertex: the lattice edge it sits on and the
// interpolation parameter, enough to route gradients mesh -> SDF.
struct ExtractionMap {
    struct Crossing {
        int a, b;   // grid vertex ids, a < b
        double t;   // vertex = (1-t)*P[a] + t*P[b], strictly in (0,1)
    };
    std::vector<Crossing> crossings;
};

struct Extraction {
    Mesh mesh;            // colors = linearly interpolated raw grid colors
    ExtractionMap map;
    int zero_sdf_perturbed = 0;
};

TetGrid build_grid(int resolution, const Vec3& bbox_min, const Vec3& bbox_max);

void init_sphere_sdf(TetGrid& grid, const Vec3& center, double radius);

// Zero SDF values are treated as +1e-10 so every edge has a definite sign
// configuration; triangles are wound so normals point toward positive SDF.
Extraction marching_tets(const TetGrid& grid);

// Position path: chain dL/dvertex through t = s_a/(s_a - s_b).
std::vector<double> backprop_to_sdf(const ExtractionMap& map, const TetGrid& grid,
                                    const std::vector<Vec3>& dL_dverts);

struct ColorBackprop {
    std::vector<Vec3> d_colors;   // per grid vertex
    std::vector<double> d_sdf;    // the color-through-t term
};

// Color path: vertex color = (1-t)*c_a + t*c_b depends on the grid colors
// directly and on the SDF through t.
ColorBackprop backprop_colors(const ExtractionMap& map, const TetGrid& grid,
                              const std::vector<Vec3>& dL_dcolors);

// Flat binary checkpoint of the optimizable grid state.
void save_grid_state(const TetGrid& grid, const std::string& path);
void load_grid_state(TetGrid& grid, const std::string& path);

}  // namespace softmesh

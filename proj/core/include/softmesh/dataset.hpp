#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "softmesh/camera.hpp"
#include "softmesh/image.hpp"
#include "softmesh/mesh.hpp"

namespace softmesh {

enum class ShapeKind { Sphere, Torus, Cube, Blob };

ShapeKind parse_shape(const std::string& name);  // sphere|torus|cube|blob
const char* shape_name(ShapeKind kind);

struct View {
    Image rgb;   // 3 channels in [0,1]
    Image mask;  // 1 channel in {0,1}
    Camera cam;
};

struct Dataset {
    std::vector<View> views;
    Mesh gt_mesh;                 // raw (unsquashed) vertex colors
    std::vector<Vec3> gt_points;  // area-uniform surface samples
    double scene_scale = 0.0;     // ground-truth bbox diagonal
    uint64_t seed = 0;
};

struct SceneBounds {
    Vec3 centroid;
    double radius = 0.0;     // max vertex distance from centroid
    double bbox_diag = 0.0;
};
SceneBounds scene_bounds(const Mesh& mesh);

// Ground-truth shape at canonical scale (object radius ~0.8, centered at the
// origin) with a smooth procedural per-vertex color pattern.
Mesh make_gt_mesh(ShapeKind kind, uint64_t seed);

// Opaque nearest-hit reference render: alpha forced to 1, mask = hit/no-hit,
// background black. Colors interpolated in display space.
void first_hit_render(const Mesh& mesh, const Camera& cam, Image& rgb, Image& mask);

// Cameras on a Fibonacci-spiral orbit at 2.5x object radius, looking at the
// centroid; ground-truth renders via first_hit_render.
Dataset make_dataset(ShapeKind kind, int n_views, int resolution, uint64_t seed,
                     int threads = 0);

// scene/{cameras.txt, view_%03d.ppm, mask_%03d.ppm, gt.obj, meta.txt}
void save_dataset(const Dataset& ds, ShapeKind kind, int resolution, const std::string& dir);
Dataset load_dataset(const std::string& dir);

}  // namespace softmesh

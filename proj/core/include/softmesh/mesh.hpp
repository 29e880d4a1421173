#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "softmesh/vec3.hpp"

namespace softmesh {

// Indexed triangle mesh. Face indices are 0-based internally; colors are raw
// (unbounded) per-vertex values squashed to [0,1] at render time. colors may
// be empty, meaning "no color attribute".
struct Mesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;
    std::vector<Vec3> colors;

    int num_vertices() const { return static_cast<int>(vertices.size()); }
    int num_faces() const { return static_cast<int>(faces.size()); }
};

struct VertexNormals {
    std::vector<Vec3> normals;        // unit vectors; (0,0,1) where flagged
    std::vector<uint8_t> flagged;     // 1 if area-weighted sum vanished
};

// Throws std::runtime_error describing the first violated invariant.
void require_valid(const Mesh& mesh);

double face_area(const Mesh& mesh, int f);
std::vector<double> face_areas(const Mesh& mesh);

// Unit face normal, (0,0,0) for degenerate faces.
Vec3 face_normal(const Mesh& mesh, int f);

// 1 where face area < kEpsArea.
std::vector<uint8_t> degenerate_flags(const Mesh& mesh);

VertexNormals compute_vertex_normals(const Mesh& mesh);

// Canonical (min,max) vertex pairs, sorted, deduplicated.
std::vector<std::pair<int, int>> edge_list(const Mesh& mesh);

// Map from canonical edge to ids of incident faces.
std::map<std::pair<int, int>, std::vector<int>> edge_faces(const Mesh& mesh);

int euler_characteristic(const Mesh& mesh);

// Every edge shared by exactly two faces that traverse it in opposite
// directions, and each vertex's incident faces form a single closed fan.
bool is_watertight_manifold(const Mesh& mesh);

// Signed volume via the divergence theorem; meaningful for closed meshes.
double enclosed_volume(const Mesh& mesh);

// Vertex 1-ring adjacency from face connectivity (undirected, sorted).
std::vector<std::vector<int>> vertex_neighbors(const Mesh& mesh);

}  // namespace softmesh

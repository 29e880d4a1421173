#include "softmesh/mesh.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "softmesh/constants.hpp"

namespace softmesh {

void require_valid(const Mesh& mesh) {
    const int nv = mesh.num_vertices();
    for (int f = 0; f < mesh.num_faces(); ++f) {
        const auto& tri = mesh.faces[f];
        for (int k = 0; k < 3; ++k) {
            if (tri[k] < 0 || tri[k] >= nv)
                throw std::runtime_error("mesh: face " + std::to_string(f) +
                                         " references vertex " + std::to_string(tri[k]) +
                                         " outside [0, " + std::to_string(nv) + ")");
        }
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
            throw std::runtime_error("mesh: face " + std::to_string(f) +
                                     " references the same vertex twice");
    }
    if (!mesh.colors.empty() && mesh.colors.size() != mesh.vertices.size())
        throw std::runtime_error("mesh: color count " + std::to_string(mesh.colors.size()) +
                                 " != vertex count " + std::to_string(mesh.vertices.size()));
}

double face_area(const Mesh& mesh, int f) {
    const auto& t = mesh.faces[f];
    Vec3 e1 = mesh.vertices[t[1]] - mesh.vertices[t[0]];
    Vec3 e2 = mesh.vertices[t[2]] - mesh.vertices[t[0]];
    return 0.5 * norm(cross(e1, e2));
}

std::vector<double> face_areas(const Mesh& mesh) {
    std::vector<double> a(mesh.faces.size());
    for (int f = 0; f < mesh.num_faces(); ++f) a[f] = face_area(mesh, f);
    return a;
}

Vec3 face_normal(const Mesh& mesh, int f) {
    const auto& t = mesh.faces[f];
    Vec3 n = cross(mesh.vertices[t[1]] - mesh.vertices[t[0]],
                   mesh.vertices[t[2]] - mesh.vertices[t[0]]);
    double len = norm(n);
    return len > 0.0 ? n / len : Vec3{0, 0, 0};
}

std::vector<uint8_t> degenerate_flags(const Mesh& mesh) {
    std::vector<uint8_t> flags(mesh.faces.size(), 0);
    for (int f = 0; f < mesh.num_faces(); ++f)
        if (face_area(mesh, f) < kEpsArea) flags[f] = 1;
    return flags;
}

VertexNormals compute_vertex_normals(const Mesh& mesh) {
    VertexNormals out;
    out.normals.assign(mesh.vertices.size(), Vec3{0, 0, 0});
    out.flagged.assign(mesh.vertices.size(), 0);
    for (const auto& t : mesh.faces) {
        // cross product length = 2*area, so this sum is area-weighted
        Vec3 an = cross(mesh.vertices[t[1]] - mesh.vertices[t[0]],
                        mesh.vertices[t[2]] - mesh.vertices[t[0]]);
        for (int k = 0; k < 3; ++k) out.normals[t[k]] += an;
    }
    for (std::size_t v = 0; v < out.normals.size(); ++v) {
        double len = norm(out.normals[v]);
        if (len > 1e-20) {
            out.normals[v] = out.normals[v] / len;
        } else {
            out.normals[v] = Vec3{0, 0, 1};
            out.flagged[v] = 1;
        }
    }
    return out;
}

std::vector<std::pair<int, int>> edge_list(const Mesh& mesh) {
    std::set<std::pair<int, int>> edges;
    for (const auto& t : mesh.faces)
        for (int k = 0; k < 3; ++k) {
            int a = t[k], b = t[(k + 1) % 3];
            edges.insert({std::min(a, b), std::max(a, b)});
        }
    return {edges.begin(), edges.end()};
}

std::map<std::pair<int, int>, std::vector<int>> edge_faces(const Mesh& mesh) {
    std::map<std::pair<int, int>, std::vector<int>> m;
    for (int f = 0; f < mesh.num_faces(); ++f) {
        const auto& t = mesh.faces[f];
        for (int k = 0; k < 3; ++k) {
            int a = t[k], b = t[(k + 1) % 3];
            m[{std::min(a, b), std::max(a, b)}].push_back(f);
        }
    }
    return m;
}

int euler_characteristic(const Mesh& mesh) {
    return mesh.num_vertices() - static_cast<int>(edge_list(mesh).size()) + mesh.num_faces();
}

namespace {

// Does face `t` traverse directed edge a->b?
bool has_directed_edge(const std::array<int, 3>& t, int a, int b) {
    for (int k = 0; k < 3; ++k)
        if (t[k] == a && t[(k + 1) % 3] == b) return true;
    return false;
}

}  // namespace

bool is_watertight_manifold(const Mesh& mesh) {
    if (mesh.faces.empty()) return false;
    auto ef = edge_faces(mesh);
    for (const auto& [e, fs] : ef) {
        if (fs.size() != 2) return false;
        // opposite traversal => consistent orientation
        bool f0_fwd = has_directed_edge(mesh.faces[fs[0]], e.first, e.second);
        bool f1_fwd = has_directed_edge(mesh.faces[fs[1]], e.first, e.second);
        if (f0_fwd == f1_fwd) return false;
    }
    // vertex-manifold: incident faces of each vertex form one closed fan
    std::vector<std::vector<int>> vfaces(mesh.vertices.size());
    for (int f = 0; f < mesh.num_faces(); ++f)
        for (int k = 0; k < 3; ++k) vfaces[mesh.faces[f][k]].push_back(f);
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        const auto& fs = vfaces[v];
        if (fs.empty()) return false;
        // walk the fan: from face, cross the edge opposite to the shared one
        std::set<int> remaining(fs.begin(), fs.end());
        std::vector<int> stack{fs[0]};
        remaining.erase(fs[0]);
        while (!stack.empty()) {
            int f = stack.back();
            stack.pop_back();
            const auto& t = mesh.faces[f];
            for (int k = 0; k < 3; ++k) {
                if (t[k] != v) continue;
                for (int other : {t[(k + 1) % 3], t[(k + 2) % 3]}) {
                    auto it = ef.find({std::min(v, other), std::max(v, other)});
                    for (int g : it->second) {
                        if (remaining.count(g)) {
                            remaining.erase(g);
                            stack.push_back(g);
                        }
                    }
                }
            }
        }
        if (!remaining.empty()) return false;
    }
    return true;
}

double enclosed_volume(const Mesh& mesh) {
    double vol = 0.0;
    for (const auto& t : mesh.faces)
        vol += dot(mesh.vertices[t[0]],
                   cross(mesh.vertices[t[1]], mesh.vertices[t[2]]));
    return vol / 6.0;
}

std::vector<std::vector<int>> vertex_neighbors(const Mesh& mesh) {
    std::vector<std::set<int>> nb(mesh.vertices.size());
    for (const auto& t : mesh.faces)
        for (int k = 0; k < 3; ++k) {
            nb[t[k]].insert(t[(k + 1) % 3]);
            nb[t[k]].insert(t[(k + 2) % 3]);
        }
    std::vector<std::vector<int>> out(mesh.vertices.size());
    for (std::size_t v = 0; v < nb.size(); ++v) out[v].assign(nb[v].begin(), nb[v].end());
    return out;
}

}  // namespace softmesh

#include "softmesh/tet_grid.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

namespace softmesh {

namespace {

// Local cube corner c has bits (x,y,z) = (c&1, c&2, c&4). Six tets around the
// 0-7 diagonal, index order fixed so every signed volume is positive.
constexpr int kCubeTets[6][4] = {{0, 1, 3, 7}, {0, 1, 7, 5}, {0, 2, 7, 3},
                                 {0, 2, 6, 7}, {0, 4, 5, 7}, {0, 4, 7, 6}};

constexpr double kZeroSdf = 1e-10;

}  // namespace

TetGrid build_grid(int resolution, const Vec3& bbox_min, const Vec3& bbox_max) {
    if (resolution < 2) throw std::runtime_error("tet grid: resolution must be >= 2");
    TetGrid g;
    g.resolution = resolution;
    g.bbox_min = bbox_min;
    g.bbox_max = bbox_max;
    const int n = resolution + 1;
    g.vertices.reserve(static_cast<std::size_t>(n) * n * n);
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) {
                double fx = static_cast<double>(ix) / resolution;
                double fy = static_cast<double>(iy) / resolution;
                double fz = static_cast<double>(iz) / resolution;
                g.vertices.push_back({bbox_min.x + fx * (bbox_max.x - bbox_min.x),
                                      bbox_min.y + fy * (bbox_max.y - bbox_min.y),
                                      bbox_min.z + fz * (bbox_max.z - bbox_min.z)});
            }
    auto vid = [n](int ix, int iy, int iz) { return (iz * n + iy) * n + ix; };
    g.tets.reserve(static_cast<std::size_t>(resolution) * resolution * resolution * 6);
    for (int iz = 0; iz < resolution; ++iz)
        for (int iy = 0; iy < resolution; ++iy)
            for (int ix = 0; ix < resolution; ++ix) {
                int corner[8];
                for (int c = 0; c < 8; ++c)
                    corner[c] = vid(ix + (c & 1), iy + ((c >> 1) & 1), iz + ((c >> 2) & 1));
                for (const auto& t : kCubeTets)
                    g.tets.push_back({corner[t[0]], corner[t[1]], corner[t[2]], corner[t[3]]});
            }
    g.sdf.assign(g.vertices.size(), 1.0);
    g.colors.assign(g.vertices.size(), Vec3{0, 0, 0});
    return g;
}

void init_sphere_sdf(TetGrid& grid, const Vec3& center, double radius) {
    if (radius <= 0.0) throw std::runtime_error("tet grid: radius must be positive");
    for (std::size_t i = 0; i < grid.vertices.size(); ++i)
        grid.sdf[i] = norm(grid.vertices[i] - center) - radius;
}

Extraction marching_tets(const TetGrid& grid) {
    Extraction out;
    auto& mesh = out.mesh;
    const auto& sdf = grid.sdf;

    int perturbed = 0;
    auto s_eff = [&sdf](int g) { return sdf[g] == 0.0 ? kZeroSdf : sdf[g]; };
    for (double s : sdf)
        if (s == 0.0) ++perturbed;
    out.zero_sdf_perturbed = perturbed;

    std::unordered_map<uint64_t, int> edge_vertex;
    auto crossing_vertex = [&](int a, int b) {
        if (a > b) std::swap(a, b);
        uint64_t key = (static_cast<uint64_t>(a) << 32) | static_cast<uint32_t>(b);
        auto it = edge_vertex.find(key);
        if (it != edge_vertex.end()) return it->second;
        double sa = s_eff(a), sb = s_eff(b);
        double t = sa / (sa - sb);
        int id = mesh.num_vertices();
        mesh.vertices.push_back(grid.vertices[a] + t * (grid.vertices[b] - grid.vertices[a]));
        mesh.colors.push_back((1.0 - t) * grid.colors[a] + t * grid.colors[b]);
        out.map.crossings.push_back({a, b, t});
        edge_vertex.emplace(key, id);
        return id;
    };

    // gradient of the linear interpolant inside a tet; orients triangles
    auto sdf_gradient = [&](const std::array<int, 4>& tet) {
        Vec3 e1 = grid.vertices[tet[1]] - grid.vertices[tet[0]];
        Vec3 e2 = grid.vertices[tet[2]] - grid.vertices[tet[0]];
        Vec3 e3 = grid.vertices[tet[3]] - grid.vertices[tet[0]];
        double d1 = s_eff(tet[1]) - s_eff(tet[0]);
        double d2 = s_eff(tet[2]) - s_eff(tet[0]);
        double d3 = s_eff(tet[3]) - s_eff(tet[0]);
        double det = dot(e1, cross(e2, e3));
        return (d1 * cross(e2, e3) + d2 * cross(e3, e1) + d3 * cross(e1, e2)) / det;
    };

    auto emit = [&](int v0, int v1, int v2, const Vec3& grad) {
        Vec3 n = cross(mesh.vertices[v1] - mesh.vertices[v0],
                       mesh.vertices[v2] - mesh.vertices[v0]);
        if (dot(n, grad) >= 0.0)
            mesh.faces.push_back({v0, v1, v2});
        else
            mesh.faces.push_back({v0, v2, v1});
    };

    const int res = grid.resolution;
    const int n = res + 1;
    auto vid = [n](int ix, int iy, int iz) { return (iz * n + iy) * n + ix; };
    std::size_t tet_index = 0;
    for (int iz = 0; iz < res; ++iz)
        for (int iy = 0; iy < res; ++iy)
            for (int ix = 0; ix < res; ++ix) {
                bool any_neg = false, any_pos = false;
                for (int c = 0; c < 8; ++c) {
                    double s = s_eff(vid(ix + (c & 1), iy + ((c >> 1) & 1), iz + ((c >> 2) & 1)));
                    (s < 0.0 ? any_neg : any_pos) = true;
                }
                if (!any_neg || !any_pos) {
                    tet_index += 6;
                    continue;
                }
                for (int k = 0; k < 6; ++k, ++tet_index) {
                    const auto& tet = grid.tets[tet_index];
                    int neg[4], pos[4], nn = 0, np = 0;
                    for (int c = 0; c < 4; ++c)
                        (s_eff(tet[c]) < 0.0 ? neg[nn++] : pos[np++]) = tet[c];
                    if (nn == 0 || nn == 4) continue;
                    Vec3 grad = sdf_gradient(tet);
                    if (nn == 1) {
                        emit(crossing_vertex(neg[0], pos[0]), crossing_vertex(neg[0], pos[1]),
                             crossing_vertex(neg[0], pos[2]), grad);
                    } else if (nn == 3) {
                        emit(crossing_vertex(neg[0], pos[0]), crossing_vertex(neg[1], pos[0]),
                             crossing_vertex(neg[2], pos[0]), grad);
                    } else {
                        // quad cycle: corners adjacent when they share a tet corner
                        int q0 = crossing_vertex(neg[0], pos[0]);
                        int q1 = crossing_vertex(neg[0], pos[1]);
                        int q2 = crossing_vertex(neg[1], pos[1]);
                        int q3 = crossing_vertex(neg[1], pos[0]);
                        emit(q0, q1, q2, grad);
                        emit(q0, q2, q3, grad);
                    }
                }
            }
    return out;
}

std::vector<double> backprop_to_sdf(const ExtractionMap& map, const TetGrid& grid,
                                    const std::vector<Vec3>& dL_dverts) {
    std::vector<double> d_sdf(grid.sdf.size(), 0.0);
    for (std::size_t v = 0; v < map.crossings.size(); ++v) {
        const auto& cr = map.crossings[v];
        double sa = grid.sdf[cr.a] == 0.0 ? 1e-10 : grid.sdf[cr.a];
        double sb = grid.sdf[cr.b] == 0.0 ? 1e-10 : grid.sdf[cr.b];
        double denom = (sa - sb) * (sa - sb);
        double dt_dsa = -sb / denom;
        double dt_dsb = sa / denom;
        double dL_dt = dot(dL_dverts[v], grid.vertices[cr.b] - grid.vertices[cr.a]);
        d_sdf[cr.a] += dL_dt * dt_dsa;
        d_sdf[cr.b] += dL_dt * dt_dsb;
    }
    return d_sdf;
}

ColorBackprop backprop_colors(const ExtractionMap& map, const TetGrid& grid,
                              const std::vector<Vec3>& dL_dcolors) {
    ColorBackprop out;
    out.d_colors.assign(grid.colors.size(), Vec3{0, 0, 0});
    out.d_sdf.assign(grid.sdf.size(), 0.0);
    for (std::size_t v = 0; v < map.crossings.size(); ++v) {
        const auto& cr = map.crossings[v];
        out.d_colors[cr.a] += (1.0 - cr.t) * dL_dcolors[v];
        out.d_colors[cr.b] += cr.t * dL_dcolors[v];
        double sa = grid.sdf[cr.a] == 0.0 ? 1e-10 : grid.sdf[cr.a];
        double sb = grid.sdf[cr.b] == 0.0 ? 1e-10 : grid.sdf[cr.b];
        double denom = (sa - sb) * (sa - sb);
        double dL_dt = dot(dL_dcolors[v], grid.colors[cr.b] - grid.colors[cr.a]);
        out.d_sdf[cr.a] += dL_dt * (-sb / denom);
        out.d_sdf[cr.b] += dL_dt * (sa / denom);
    }
    return out;
}

namespace {
constexpr char kGridMagic[8] = {'S', 'M', 'G', 'R', 'I', 'D', '0', '1'};
}

void save_grid_state(const TetGrid& grid, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("grid: cannot write " + path);
    out.write(kGridMagic, sizeof(kGridMagic));
    int64_t res = grid.resolution, nverts = static_cast<int64_t>(grid.vertices.size());
    out.write(reinterpret_cast<const char*>(&res), sizeof(res));
    out.write(reinterpret_cast<const char*>(&nverts), sizeof(nverts));
    double bbox[6] = {grid.bbox_min.x, grid.bbox_min.y, grid.bbox_min.z,
                      grid.bbox_max.x, grid.bbox_max.y, grid.bbox_max.z};
    out.write(reinterpret_cast<const char*>(bbox), sizeof(bbox));
    out.write(reinterpret_cast<const char*>(grid.sdf.data()), nverts * sizeof(double));
    out.write(reinterpret_cast<const char*>(grid.colors.data()), nverts * sizeof(Vec3));
}

void load_grid_state(TetGrid& grid, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("grid: cannot open " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (std::memcmp(magic, kGridMagic, sizeof(magic)) != 0)
        throw std::runtime_error("grid: bad magic in " + path);
    int64_t res, nverts;
    in.read(reinterpret_cast<char*>(&res), sizeof(res));
    in.read(reinterpret_cast<char*>(&nverts), sizeof(nverts));
    double bbox[6];
    in.read(reinterpret_cast<char*>(bbox), sizeof(bbox));
    if (res != grid.resolution || nverts != static_cast<int64_t>(grid.vertices.size()))
        throw std::runtime_error("grid: checkpoint shape mismatch in " + path);
    in.read(reinterpret_cast<char*>(grid.sdf.data()), nverts * sizeof(double));
    in.read(reinterpret_cast<char*>(grid.colors.data()), nverts * sizeof(Vec3));
    if (!in) throw std::runtime_error("grid: truncated checkpoint " + path);
}

}  // namespace softmesh

#include "softmesh/shapes.hpp"

#include <cmath>
#include <map>

#include "softmesh/rng.hpp"

namespace softmesh {

Mesh make_box(const Vec3& mn, const Vec3& mx) {
    Mesh m;
    for (int i = 0; i < 8; ++i)
        m.vertices.push_back({(i & 1) ? mx.x : mn.x,
                              (i & 2) ? mx.y : mn.y,
                              (i & 4) ? mx.z : mn.z});
    // face diagonals chosen to avoid corners 0 and 7, so both main-diagonal
    // corners have exactly three incident faces
    m.faces = {{0, 2, 1}, {2, 3, 1},   // z = min
               {4, 5, 6}, {5, 7, 6},   // z = max
               {0, 1, 4}, {1, 5, 4},   // y = min
               {2, 6, 3}, {6, 7, 3},   // y = max
               {0, 4, 2}, {4, 6, 2},   // x = min
               {1, 3, 5}, {3, 7, 5}};  // x = max
    return m;
}

namespace {

const double kPhi = (1.0 + std::sqrt(5.0)) / 2.0;

Mesh icosahedron() {
    Mesh m;
    m.vertices = {{-1, kPhi, 0}, {1, kPhi, 0}, {-1, -kPhi, 0}, {1, -kPhi, 0},
                  {0, -1, kPhi}, {0, 1, kPhi}, {0, -1, -kPhi}, {0, 1, -kPhi},
                  {kPhi, 0, -1}, {kPhi, 0, 1}, {-kPhi, 0, -1}, {-kPhi, 0, 1}};
    m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
               {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
               {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
               {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    return m;
}

}  // namespace

Mesh make_icosphere(const Vec3& center, double radius, int subdivisions) {
    Mesh m = icosahedron();
    for (auto& v : m.vertices) v = normalized(v);
    for (int level = 0; level < subdivisions; ++level) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            auto key = std::make_pair(std::min(a, b), std::max(a, b));
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            int id = m.num_vertices();
            m.vertices.push_back(normalized(m.vertices[a] + m.vertices[b]));
            midpoint[key] = id;
            return id;
        };
        std::vector<std::array<int, 3>> faces;
        faces.reserve(m.faces.size() * 4);
        for (const auto& t : m.faces) {
            int ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
            faces.push_back({t[0], ab, ca});
            faces.push_back({t[1], bc, ab});
            faces.push_back({t[2], ca, bc});
            faces.push_back({ab, bc, ca});
        }
        m.faces = std::move(faces);
    }
    for (auto& v : m.vertices) v = center + v * radius;
    return m;
}

Mesh make_torus(const Vec3& center, double major_radius, double minor_radius,
                int nu, int nv) {
    Mesh m;
    const double tau = 2.0 * M_PI;
    for (int i = 0; i < nu; ++i) {
        double u = tau * i / nu;
        for (int j = 0; j < nv; ++j) {
            double v = tau * j / nv;
            double ring = major_radius + minor_radius * std::cos(v);
            m.vertices.push_back(center + Vec3{ring * std::cos(u), ring * std::sin(u),
                                               minor_radius * std::sin(v)});
        }
    }
    auto id = [&](int i, int j) { return (i % nu) * nv + (j % nv); };
    for (int i = 0; i < nu; ++i)
        for (int j = 0; j < nv; ++j) {
            m.faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            m.faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    return m;
}

Mesh make_blob(const Vec3& center, double radius, double amplitude, int subdivisions,
               uint64_t seed) {
    Mesh m = make_icosphere({0, 0, 0}, 1.0, subdivisions);
    Rng rng(seed);
    constexpr int kWaves = 6;
    Vec3 axis[kWaves];
    double freq[kWaves], phase[kWaves], amp[kWaves];
    for (int k = 0; k < kWaves; ++k) {
        axis[k] = normalized({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
        freq[k] = rng.uniform(1.0, 3.0);
        phase[k] = rng.uniform(0.0, 2.0 * M_PI);
        amp[k] = rng.uniform(0.5, 1.0) / kWaves;
    }
    for (auto& v : m.vertices) {
        double noise = 0.0;
        for (int k = 0; k < kWaves; ++k)
            noise += amp[k] * std::cos(freq[k] * M_PI * dot(axis[k], v) + phase[k]);
        v = center + v * (radius * (1.0 + amplitude * noise));
    }
    return m;
}

}  // namespace softmesh

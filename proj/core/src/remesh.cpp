#include "softmesh/remesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "softmesh/text_format.hpp"

namespace softmesh {

namespace {

using Edge = std::pair<int, int>;

Edge canon(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

// Mutable surgery state. Faces and vertices are tombstoned during a pass and
// compacted at the end; every per-vertex attachment is kept index-aligned.
struct Workspace {
    std::vector<Vec3> pos;
    std::vector<std::array<int, 3>> faces;
    std::vector<uint8_t> face_alive;
    std::vector<uint8_t> vert_alive;
    std::vector<std::vector<Vec3>> vattr;    // [attachment][vertex]
    std::vector<std::vector<long>> vcount;   // [attachment][vertex]
    std::vector<std::vector<int>> vfaces;    // may hold stale ids; filter on use

    int add_vertex_between(int a, int b) {
        int id = static_cast<int>(pos.size());
        pos.push_back((pos[a] + pos[b]) * 0.5);
        vert_alive.push_back(1);
        for (auto& attr : vattr) attr.push_back((attr[a] + attr[b]) * 0.5);
        for (auto& cnt : vcount) cnt.push_back(0);
        vfaces.emplace_back();
        return id;
    }

    void rebuild_vfaces() {
        for (auto& l : vfaces) l.clear();
        vfaces.resize(pos.size());
        for (std::size_t f = 0; f < faces.size(); ++f) {
            if (!face_alive[f]) continue;
            for (int k = 0; k < 3; ++k) vfaces[faces[f][k]].push_back(static_cast<int>(f));
        }
    }

    double edge_len(int a, int b) const { return norm(pos[a] - pos[b]); }
};

std::map<Edge, std::vector<int>> live_edge_faces(const Workspace& ws) {
    std::map<Edge, std::vector<int>> ef;
    for (std::size_t f = 0; f < ws.faces.size(); ++f) {
        if (!ws.face_alive[f]) continue;
        const auto& t = ws.faces[f];
        for (int k = 0; k < 3; ++k)
            ef[canon(t[k], t[(k + 1) % 3])].push_back(static_cast<int>(f));
    }
    return ef;
}

int split_pass(Workspace& ws, const RemeshConfig& cfg, int budget) {
    const double limit = cfg.split_factor * cfg.target_edge;
    struct Long {
        double len;
        Edge e;
    };
    std::vector<Long> longest;
    {
        std::set<Edge> seen;
        for (std::size_t f = 0; f < ws.faces.size(); ++f) {
            if (!ws.face_alive[f]) continue;
            const auto& t = ws.faces[f];
            for (int k = 0; k < 3; ++k) {
                Edge e = canon(t[k], t[(k + 1) % 3]);
                if (!seen.insert(e).second) continue;
                double len = ws.edge_len(e.first, e.second);
                if (len > limit) longest.push_back({len, e});
            }
        }
    }
    std::sort(longest.begin(), longest.end(), [](const Long& a, const Long& b) {
        if (a.len != b.len) return a.len > b.len;
        return a.e < b.e;
    });
    if (static_cast<int>(longest.size()) > budget) longest.resize(budget);
    if (longest.empty()) return 0;

    std::map<Edge, int> midpoint;
    for (const auto& l : longest)
        midpoint[l.e] = ws.add_vertex_between(l.e.first, l.e.second);

    // conforming re-triangulation per face, by split-edge pattern
    const std::size_t nf = ws.faces.size();
    for (std::size_t f = 0; f < nf; ++f) {
        if (!ws.face_alive[f]) continue;
        const auto t = ws.faces[f];
        int mid[3];
        int nsplit = 0;
        for (int k = 0; k < 3; ++k) {
            auto it = midpoint.find(canon(t[k], t[(k + 1) % 3]));
            mid[k] = it == midpoint.end() ? -1 : it->second;
            if (mid[k] >= 0) ++nsplit;
        }
        if (nsplit == 0) continue;
        ws.face_alive[f] = 0;
        auto emit = [&](int a, int b, int c) {
            ws.faces.push_back({a, b, c});
            ws.face_alive.push_back(1);
        };
        if (nsplit == 3) {
            emit(t[0], mid[0], mid[2]);
            emit(mid[0], t[1], mid[1]);
            emit(mid[2], mid[1], t[2]);
            emit(mid[0], mid[1], mid[2]);
        } else if (nsplit == 1) {
            int k = mid[0] >= 0 ? 0 : (mid[1] >= 0 ? 1 : 2);
            int a = t[k], b = t[(k + 1) % 3], c = t[(k + 2) % 3], m = mid[k];
            emit(a, m, c);
            emit(m, b, c);
        } else {
            // rotate so the unsplit edge is (c, a): edges (a,b) and (b,c) carry mids
            int k = mid[0] < 0 ? 1 : (mid[1] < 0 ? 2 : 0);
            int a = t[k], b = t[(k + 1) % 3], c = t[(k + 2) % 3];
            int mab = mid[k], mbc = mid[(k + 1) % 3];
            emit(a, mab, mbc);
            emit(mab, b, mbc);
            emit(a, mbc, c);
        }
    }
    return static_cast<int>(longest.size());
}

std::set<int> live_neighbors(const Workspace& ws, int v) {
    std::set<int> nb;
    for (int f : ws.vfaces[v]) {
        if (!ws.face_alive[f]) continue;
        const auto& t = ws.faces[f];
        if (t[0] != v && t[1] != v && t[2] != v) continue;
        for (int k = 0; k < 3; ++k)
            if (t[k] != v) nb.insert(t[k]);
    }
    return nb;
}

int collapse_pass(Workspace& ws, const RemeshConfig& cfg, int budget) {
    const double limit = cfg.collapse_factor * cfg.target_edge;
    const double long_limit = cfg.split_factor * cfg.target_edge;
    ws.rebuild_vfaces();

    struct Short {
        double len;
        Edge e;
    };
    std::vector<Short> shortest;
    {
        std::set<Edge> seen;
        for (std::size_t f = 0; f < ws.faces.size(); ++f) {
            if (!ws.face_alive[f]) continue;
            const auto& t = ws.faces[f];
            for (int k = 0; k < 3; ++k) {
                Edge e = canon(t[k], t[(k + 1) % 3]);
                if (!seen.insert(e).second) continue;
                double len = ws.edge_len(e.first, e.second);
                if (len < limit) shortest.push_back({len, e});
            }
        }
    }
    std::sort(shortest.begin(), shortest.end(), [](const Short& a, const Short& b) {
        if (a.len != b.len) return a.len < b.len;
        return a.e < b.e;
    });

    int done = 0;
    for (const auto& cand : shortest) {
        if (done >= budget) break;
        int a = cand.e.first, b = cand.e.second;
        if (!ws.vert_alive[a] || !ws.vert_alive[b]) continue;

        std::set<int> na = live_neighbors(ws, a);
        if (!na.count(b)) continue;                       // edge gone
        if (ws.edge_len(a, b) >= limit) continue;         // moved apart

        // faces shared by the edge, and their opposite vertices
        std::vector<int> shared;
        std::set<int> opposite;
        for (int f : ws.vfaces[a]) {
            if (!ws.face_alive[f]) continue;
            const auto& t = ws.faces[f];
            bool ha = t[0] == a || t[1] == a || t[2] == a;
            bool hb = t[0] == b || t[1] == b || t[2] == b;
            if (ha && hb) {
                shared.push_back(f);
                for (int k = 0; k < 3; ++k)
                    if (t[k] != a && t[k] != b) opposite.insert(t[k]);
            }
        }
        if (shared.size() != 1 && shared.size() != 2) continue;

        // link condition: shared neighbor vertices are exactly the opposites,
        // and no face fan on either side shares a whole opposite edge
        std::set<int> nb = live_neighbors(ws, b);
        std::set<int> common;
        std::set_intersection(na.begin(), na.end(), nb.begin(), nb.end(),
                              std::inserter(common, common.begin()));
        if (common != opposite) continue;
        {
            std::set<Edge> opp_a;
            bool bad = false;
            for (int f : ws.vfaces[a]) {
                if (!ws.face_alive[f]) continue;
                const auto& t = ws.faces[f];
                if (t[0] != a && t[1] != a && t[2] != a) continue;
                bool hb = t[0] == b || t[1] == b || t[2] == b;
                if (hb) continue;
                int x = -1, y = -1;
                for (int k = 0; k < 3; ++k)
                    if (t[k] != a) (x < 0 ? x : y) = t[k];
                opp_a.insert(canon(x, y));
            }
            for (int f : ws.vfaces[b]) {
                if (bad || !ws.face_alive[f]) continue;
                const auto& t = ws.faces[f];
                if (t[0] != b && t[1] != b && t[2] != b) continue;
                bool ha = t[0] == a || t[1] == a || t[2] == a;
                if (ha) continue;
                int x = -1, y = -1;
                for (int k = 0; k < 3; ++k)
                    if (t[k] != b) (x < 0 ? x : y) = t[k];
                if (opp_a.count(canon(x, y))) bad = true;
            }
            if (bad) continue;
        }

        Vec3 mid = (ws.pos[a] + ws.pos[b]) * 0.5;

        // no overlong edges out of the merged vertex (keeps split/collapse
        // from oscillating)
        bool too_long = false;
        for (int n : na)
            if (n != b && norm(ws.pos[n] - mid) > long_limit) too_long = true;
        for (int n : nb)
            if (n != a && norm(ws.pos[n] - mid) > long_limit) too_long = true;
        if (too_long) continue;

        // no surviving face may flip by more than 90 degrees
        bool flips = false;
        auto check_faces = [&](int v) {
            for (int f : ws.vfaces[v]) {
                if (flips || !ws.face_alive[f]) continue;
                const auto& t = ws.faces[f];
                if (t[0] != v && t[1] != v && t[2] != v) continue;
                bool is_shared = false;
                for (int s : shared) is_shared |= (s == f);
                if (is_shared) continue;
                Vec3 p[3], q[3];
                for (int k = 0; k < 3; ++k) {
                    p[k] = ws.pos[t[k]];
                    q[k] = (t[k] == a || t[k] == b) ? mid : ws.pos[t[k]];
                }
                Vec3 n_old = cross(p[1] - p[0], p[2] - p[0]);
                Vec3 n_new = cross(q[1] - q[0], q[2] - q[0]);
                if (dot(n_old, n_new) <= 0.0) flips = true;
            }
        };
        check_faces(a);
        check_faces(b);
        if (flips) continue;

        // commit: b merges into a at the midpoint
        ws.pos[a] = mid;
        for (auto& attr : ws.vattr) attr[a] = (attr[a] + attr[b]) * 0.5;
        for (auto& cnt : ws.vcount) cnt[a] = std::max(cnt[a], cnt[b]);
        for (int f : shared) ws.face_alive[f] = 0;
        for (int f : ws.vfaces[b]) {
            if (!ws.face_alive[f]) continue;
            auto& t = ws.faces[f];
            for (int k = 0; k < 3; ++k)
                if (t[k] == b) t[k] = a;
            ws.vfaces[a].push_back(f);
        }
        ws.vert_alive[b] = 0;
        ws.vfaces[b].clear();
        ++done;
    }
    return done;
}

int flip_pass(Workspace& ws, int budget) {
    auto ef = live_edge_faces(ws);

    // valences and boundary flags from live connectivity
    std::vector<int> valence(ws.pos.size(), 0);
    std::vector<uint8_t> boundary(ws.pos.size(), 0);
    std::set<Edge> edges;
    for (const auto& [e, fs] : ef) {
        edges.insert(e);
        ++valence[e.first];
        ++valence[e.second];
        if (fs.size() == 1) boundary[e.first] = boundary[e.second] = 1;
    }
    auto deviation = [&](int v, int delta) {
        int target = boundary[v] ? 4 : 6;
        int d = valence[v] + delta - target;
        return d * d;
    };

    std::vector<uint8_t> face_touched(ws.faces.size(), 0);
    int done = 0;
    for (const auto& [e, fs] : ef) {
        if (done >= budget) break;
        if (fs.size() != 2) continue;
        int f1 = fs[0], f2 = fs[1];
        if (face_touched[f1] || face_touched[f2]) continue;
        if (!ws.face_alive[f1] || !ws.face_alive[f2]) continue;

        // rotate f1 to (a,b,c) with directed edge a->b; f2 must hold b->a
        auto t1 = ws.faces[f1];
        auto t2 = ws.faces[f2];
        int a = -1, b = -1, c = -1, d = -1;
        for (int k = 0; k < 3; ++k) {
            Edge cand = canon(t1[k], t1[(k + 1) % 3]);
            if (cand == e) {
                a = t1[k];
                b = t1[(k + 1) % 3];
                c = t1[(k + 2) % 3];
            }
        }
        bool ok = false;
        for (int k = 0; k < 3; ++k)
            if (t2[k] == b && t2[(k + 1) % 3] == a) {
                d = t2[(k + 2) % 3];
                ok = true;
            }
        if (!ok || c == d) continue;
        if (edges.count(canon(c, d))) continue;

        int old_dev = deviation(a, 0) + deviation(b, 0) + deviation(c, 0) + deviation(d, 0);
        int new_dev = deviation(a, -1) + deviation(b, -1) + deviation(c, 1) + deviation(d, 1);
        if (new_dev >= old_dev) continue;

        Vec3 n_old = cross(ws.pos[b] - ws.pos[a], ws.pos[c] - ws.pos[a]) +
                     cross(ws.pos[a] - ws.pos[b], ws.pos[d] - ws.pos[b]);
        Vec3 n1 = cross(ws.pos[d] - ws.pos[a], ws.pos[c] - ws.pos[a]);
        Vec3 n2 = cross(ws.pos[b] - ws.pos[d], ws.pos[c] - ws.pos[d]);
        if (dot(n1, n_old) <= 0.0 || dot(n2, n_old) <= 0.0) continue;

        ws.faces[f1] = {a, d, c};
        ws.faces[f2] = {d, b, c};
        face_touched[f1] = face_touched[f2] = 1;
        edges.erase(e);
        edges.insert(canon(c, d));
        --valence[a];
        --valence[b];
        ++valence[c];
        ++valence[d];
        ++done;
    }
    return done;
}

void smooth_pass(Workspace& ws, const RemeshConfig& cfg) {
    ws.rebuild_vfaces();

    std::vector<uint8_t> boundary(ws.pos.size(), 0);
    for (const auto& [e, fs] : live_edge_faces(ws))
        if (fs.size() == 1) boundary[e.first] = boundary[e.second] = 1;

    // area-weighted vertex normals over live faces
    std::vector<Vec3> normal(ws.pos.size(), Vec3{0, 0, 0});
    for (std::size_t f = 0; f < ws.faces.size(); ++f) {
        if (!ws.face_alive[f]) continue;
        const auto& t = ws.faces[f];
        Vec3 an = cross(ws.pos[t[1]] - ws.pos[t[0]], ws.pos[t[2]] - ws.pos[t[0]]);
        for (int k = 0; k < 3; ++k) normal[t[k]] += an;
    }

    std::vector<Vec3> next = ws.pos;
    for (std::size_t v = 0; v < ws.pos.size(); ++v) {
        if (!ws.vert_alive[v] || boundary[v]) continue;
        std::set<int> nb = live_neighbors(ws, static_cast<int>(v));
        if (nb.empty()) continue;
        Vec3 centroid{0, 0, 0};
        for (int n : nb) centroid += ws.pos[n];
        centroid = centroid / static_cast<double>(nb.size());
        Vec3 delta = centroid - ws.pos[v];
        double len = norm(normal[v]);
        if (len > 1e-20) {
            Vec3 n = normal[v] / len;
            delta -= n * dot(n, delta);
        }
        next[v] = ws.pos[v] + cfg.smooth_lambda * delta;
    }
    ws.pos = std::move(next);
}

}  // namespace

Mesh remesh_step(const Mesh& mesh, const RemeshConfig& cfg, const RemeshAttachments& att,
                 RemeshStats* stats) {
    require_valid(mesh);
    for (const auto& [e, fs] : edge_faces(mesh))
        if (fs.size() > 2)
            throw std::runtime_error("remesh: non-manifold input, edge " +
                                     std::to_string(e.first) + "-" + std::to_string(e.second) +
                                     " shared by " + std::to_string(fs.size()) + " faces");
    for (auto* arr : att.vec3_arrays)
        if (arr->size() != mesh.vertices.size())
            throw std::runtime_error("remesh: attachment length mismatch");
    for (auto* arr : att.counter_arrays)
        if (arr->size() != mesh.vertices.size())
            throw std::runtime_error("remesh: counter attachment length mismatch");

    Workspace ws;
    ws.pos = mesh.vertices;
    ws.faces = mesh.faces;
    ws.face_alive.assign(mesh.faces.size(), 1);
    ws.vert_alive.assign(mesh.vertices.size(), 1);
    if (!mesh.colors.empty()) ws.vattr.push_back(mesh.colors);
    for (auto* arr : att.vec3_arrays) ws.vattr.push_back(*arr);
    for (auto* arr : att.counter_arrays) ws.vcount.push_back(*arr);
    ws.rebuild_vfaces();

    int budget = cfg.max_ops_per_call;
    int splits = split_pass(ws, cfg, budget);
    budget -= splits;
    int collapses = collapse_pass(ws, cfg, budget);
    budget -= collapses;
    int flips = flip_pass(ws, budget);
    smooth_pass(ws, cfg);
    if (stats) *stats = {splits, collapses, flips};

    // compact
    std::vector<int> remap(ws.pos.size(), -1);
    Mesh out;
    for (std::size_t v = 0; v < ws.pos.size(); ++v) {
        if (!ws.vert_alive[v]) continue;
        remap[v] = out.num_vertices();
        out.vertices.push_back(ws.pos[v]);
    }
    for (std::size_t f = 0; f < ws.faces.size(); ++f) {
        if (!ws.face_alive[f]) continue;
        const auto& t = ws.faces[f];
        out.faces.push_back({remap[t[0]], remap[t[1]], remap[t[2]]});
    }
    std::size_t attr_idx = 0;
    if (!mesh.colors.empty()) {
        out.colors.reserve(out.vertices.size());
        for (std::size_t v = 0; v < ws.pos.size(); ++v)
            if (ws.vert_alive[v]) out.colors.push_back(ws.vattr[0][v]);
        attr_idx = 1;
    }
    for (auto* arr : att.vec3_arrays) {
        arr->clear();
        for (std::size_t v = 0; v < ws.pos.size(); ++v)
            if (ws.vert_alive[v]) arr->push_back(ws.vattr[attr_idx][v]);
        ++attr_idx;
    }
    for (std::size_t c = 0; c < att.counter_arrays.size(); ++c) {
        auto* arr = att.counter_arrays[c];
        arr->clear();
        for (std::size_t v = 0; v < ws.pos.size(); ++v)
            if (ws.vert_alive[v]) arr->push_back(ws.vcount[c][v]);
    }
    return out;
}

MeshQuality mesh_quality_report(const Mesh& mesh, double band_lo, double band_hi) {
    MeshQuality q;
    q.vertices = mesh.num_vertices();
    q.faces = mesh.num_faces();
    auto ef = edge_faces(mesh);
    q.edges = static_cast<int>(ef.size());
    q.euler = q.vertices - q.edges + q.faces;
    for (const auto& [e, fs] : ef)
        if (fs.size() == 1) ++q.boundary_edges;
    q.watertight_manifold = is_watertight_manifold(mesh);
    q.volume = enclosed_volume(mesh);

    double len_sum = 0.0;
    int in_band = 0;
    q.edge_min = 1e300;
    for (const auto& [e, fs] : ef) {
        double len = norm(mesh.vertices[e.first] - mesh.vertices[e.second]);
        len_sum += len;
        q.edge_min = std::min(q.edge_min, len);
        q.edge_max = std::max(q.edge_max, len);
        if (band_hi > 0.0 && len >= band_lo && len <= band_hi) ++in_band;
    }
    if (q.edges > 0) q.edge_mean = len_sum / q.edges;
    if (q.edges == 0) q.edge_min = 0.0;
    if (band_hi > 0.0 && q.edges > 0)
        q.edge_fraction_in_band = static_cast<double>(in_band) / q.edges;

    double qual_sum = 0.0;
    q.quality_min = 1e300;
    int counted = 0;
    for (int f = 0; f < mesh.num_faces(); ++f) {
        const auto& t = mesh.faces[f];
        double la = norm(mesh.vertices[t[1]] - mesh.vertices[t[0]]);
        double lb = norm(mesh.vertices[t[2]] - mesh.vertices[t[1]]);
        double lc = norm(mesh.vertices[t[0]] - mesh.vertices[t[2]]);
        double area = face_area(mesh, f);
        double s = 0.5 * (la + lb + lc);
        if (s <= 0.0 || la * lb * lc <= 0.0) continue;
        // 2 * inradius / circumradius = 8 * area^2 / (s * a * b * c)
        double val = 8.0 * area * area / (s * la * lb * lc);
        qual_sum += val;
        q.quality_min = std::min(q.quality_min, val);
        ++counted;
    }
    if (counted > 0)
        q.quality_mean = qual_sum / counted;
    else
        q.quality_min = 0.0;
    return q;
}

std::string quality_csv_header() {
    return "verts,edges,faces,euler,boundary_edges,watertight,edge_min,edge_mean,edge_max,"
           "quality_min,quality_mean,volume";
}

std::string quality_csv_row(const MeshQuality& q) {
    std::ostringstream ss;
    ss << q.vertices << ',' << q.edges << ',' << q.faces << ',' << q.euler << ','
       << q.boundary_edges << ',' << (q.watertight_manifold ? 1 : 0) << ','
       << fmt_g9(q.edge_min) << ',' << fmt_g9(q.edge_mean) << ',' << fmt_g9(q.edge_max) << ','
       << fmt_g9(q.quality_min) << ',' << fmt_g9(q.quality_mean) << ',' << fmt_g9(q.volume);
    return ss.str();
}

}  // namespace softmesh

#include "softmesh/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "softmesh/appearance.hpp"
#include "softmesh/chamfer.hpp"
#include "softmesh/intersect.hpp"
#include "softmesh/obj_io.hpp"
#include "softmesh/parallel.hpp"
#include "softmesh/shapes.hpp"

namespace softmesh {

namespace {

constexpr double kOrbitScale = 2.5;     // camera distance / object radius
constexpr int kGtSamples = 20000;
constexpr uint64_t kPointStream = 77;   // rng fork for gt surface samples

std::string view_path(const std::string& dir, const char* prefix, int i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s_%03d.ppm", prefix, i);
    return dir + "/" + buf;
}

// smooth per-vertex display colors, fixed relative to object frame
void paint_mesh(Mesh& mesh) {
    SceneBounds sb = scene_bounds(mesh);
    mesh.colors.resize(mesh.vertices.size());
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        Vec3 q = (mesh.vertices[v] - sb.centroid) / std::max(sb.radius, 1e-12);
        Vec3 disp{0.5 + 0.35 * std::sin(3.0 * q.x + 1.0),
                  0.5 + 0.35 * std::sin(3.0 * q.y + 2.0),
                  0.5 + 0.35 * std::sin(3.0 * q.z + 3.0)};
        mesh.colors[v] = unsquash_color(disp);
    }
}

}  // namespace

ShapeKind parse_shape(const std::string& name) {
    if (name == "sphere") return ShapeKind::Sphere;
    if (name == "torus") return ShapeKind::Torus;
    if (name == "cube") return ShapeKind::Cube;
    if (name == "blob") return ShapeKind::Blob;
    throw std::runtime_error("unknown shape '" + name + "' (expected sphere|torus|cube|blob)");
}

const char* shape_name(ShapeKind kind) {
    switch (kind) {
        case ShapeKind::Sphere: return "sphere";
        case ShapeKind::Torus: return "torus";
        case ShapeKind::Cube: return "cube";
        case ShapeKind::Blob: return "blob";
    }
    return "?";
}

SceneBounds scene_bounds(const Mesh& mesh) {
    if (mesh.vertices.empty()) throw std::runtime_error("scene_bounds: empty mesh");
    Vec3 mn = mesh.vertices[0], mx = mesh.vertices[0];
    Vec3 sum{0, 0, 0};
    for (const Vec3& v : mesh.vertices) {
        mn = Vec3{std::min(mn.x, v.x), std::min(mn.y, v.y), std::min(mn.z, v.z)};
        mx = Vec3{std::max(mx.x, v.x), std::max(mx.y, v.y), std::max(mx.z, v.z)};
        sum += v;
    }
    SceneBounds sb;
    sb.centroid = sum / static_cast<double>(mesh.vertices.size());
    for (const Vec3& v : mesh.vertices) sb.radius = std::max(sb.radius, norm(v - sb.centroid));
    sb.bbox_diag = norm(mx - mn);
    return sb;
}

Mesh make_gt_mesh(ShapeKind kind, uint64_t seed) {
    Mesh mesh;
    switch (kind) {
        case ShapeKind::Sphere: mesh = make_icosphere({0, 0, 0}, 0.8, 3); break;
        case ShapeKind::Torus: mesh = make_torus({0, 0, 0}, 0.55, 0.25, 48, 24); break;
        case ShapeKind::Cube: mesh = make_box({-0.55, -0.55, -0.55}, {0.55, 0.55, 0.55}); break;
        case ShapeKind::Blob: mesh = make_blob({0, 0, 0}, 0.7, 0.18, 3, seed); break;
    }
    paint_mesh(mesh);
    return mesh;
}

void first_hit_render(const Mesh& mesh, const Camera& cam, Image& rgb, Image& mask) {
    rgb = Image(cam.width, cam.height, 3);
    mask = Image(cam.width, cam.height, 1);

    std::vector<Vec3> display(mesh.colors.size());
    for (std::size_t v = 0; v < mesh.colors.size(); ++v)
        display[v] = squash_color(mesh.colors[v]);

    // screen AABB tile bins, 16 px, inflated by 1 px
    const int tile = 16;
    const int tx = (cam.width + tile - 1) / tile, ty = (cam.height + tile - 1) / tile;
    std::vector<std::vector<int>> bins(static_cast<std::size_t>(tx) * ty);
    std::vector<Projected> proj(mesh.vertices.size());
    std::vector<uint8_t> behind(mesh.vertices.size(), 0);
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        Vec3 pc = mesh.vertices[v] - camera_center(cam);
        double z = dot(cam.rotation.row[2], pc);
        behind[v] = z <= cam.near;
        proj[v] = project(cam, mesh.vertices[v]);
    }
    for (int f = 0; f < mesh.num_faces(); ++f) {
        const auto& t = mesh.faces[f];
        if (behind[t[0]] || behind[t[1]] || behind[t[2]]) continue;
        double umin = 1e300, umax = -1e300, vmin = 1e300, vmax = -1e300;
        for (int k = 0; k < 3; ++k) {
            umin = std::min(umin, proj[t[k]].u);
            umax = std::max(umax, proj[t[k]].u);
            vmin = std::min(vmin, proj[t[k]].v);
            vmax = std::max(vmax, proj[t[k]].v);
        }
        int x0 = std::max(0, static_cast<int>(std::floor((umin - 1.0) / tile)));
        int x1 = std::min(tx - 1, static_cast<int>(std::floor((umax + 1.0) / tile)));
        int y0 = std::max(0, static_cast<int>(std::floor((vmin - 1.0) / tile)));
        int y1 = std::min(ty - 1, static_cast<int>(std::floor((vmax + 1.0) / tile)));
        for (int by = y0; by <= y1; ++by)
            for (int bx = x0; bx <= x1; ++bx)
                bins[static_cast<std::size_t>(by) * tx + bx].push_back(f);
    }

    for (int y = 0; y < cam.height; ++y) {
        for (int x = 0; x < cam.width; ++x) {
            Ray ray = pixel_ray(cam, x, y);
            double best_t = 1e300;
            int best_f = -1;
            Vec3 best_bary;
            for (int f : bins[static_cast<std::size_t>(y / tile) * tx + x / tile]) {
                const auto& t = mesh.faces[f];
                auto hit = ray_triangle_intersect(ray.origin, ray.direction,
                                                  mesh.vertices[t[0]], mesh.vertices[t[1]],
                                                  mesh.vertices[t[2]]);
                if (!hit || hit->t <= cam.near || hit->t >= cam.far) continue;
                if (hit->t < best_t) {
                    best_t = hit->t;
                    best_f = f;
                    best_bary = hit->bary;
                }
            }
            if (best_f >= 0) {
                const auto& t = mesh.faces[best_f];
                Vec3 c = best_bary.x * display[t[0]] + best_bary.y * display[t[1]] +
                         best_bary.z * display[t[2]];
                rgb.at(x, y, 0) = c.x;
                rgb.at(x, y, 1) = c.y;
                rgb.at(x, y, 2) = c.z;
                mask.at(x, y, 0) = 1.0;
            }
        }
    }
}

Dataset make_dataset(ShapeKind kind, int n_views, int resolution, uint64_t seed, int threads) {
    if (n_views < 2) throw std::runtime_error("make_dataset: need at least 2 views");
    if (resolution < 8) throw std::runtime_error("make_dataset: resolution too small");

    Dataset ds;
    ds.seed = seed;
    ds.gt_mesh = make_gt_mesh(kind, seed);
    SceneBounds sb = scene_bounds(ds.gt_mesh);
    ds.scene_scale = sb.bbox_diag;

    const double dist = kOrbitScale * sb.radius;
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    ds.views.resize(n_views);
    for (int i = 0; i < n_views; ++i) {
        double z = 1.0 - 2.0 * (i + 0.5) / n_views;
        double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        double phi = golden * i;
        Vec3 dir{r * std::cos(phi), r * std::sin(phi), z};
        Vec3 up = std::abs(dir.z) > 0.95 ? Vec3{0, 1, 0} : Vec3{0, 0, 1};
        ds.views[i].cam = make_look_at(sb.centroid + dist * dir, sb.centroid, up,
                                       resolution, resolution, resolution, resolution,
                                       0.1 * sb.radius, 6.0 * sb.radius);
    }
    parallel_for(static_cast<std::size_t>(n_views), threads, [&](std::size_t i) {
        first_hit_render(ds.gt_mesh, ds.views[i].cam, ds.views[i].rgb, ds.views[i].mask);
    });

    Rng rng = Rng(seed).fork(kPointStream);
    ds.gt_points = sample_surface(ds.gt_mesh, kGtSamples, rng);
    return ds;
}

void save_dataset(const Dataset& ds, ShapeKind kind, int resolution, const std::string& dir) {
    std::filesystem::create_directories(dir);
    std::vector<Camera> cams;
    for (const View& v : ds.views) cams.push_back(v.cam);
    save_cameras(cams, dir + "/cameras.txt");
    for (std::size_t i = 0; i < ds.views.size(); ++i) {
        save_ppm(ds.views[i].rgb, view_path(dir, "view", static_cast<int>(i)));
        save_ppm(ds.views[i].mask, view_path(dir, "mask", static_cast<int>(i)));
    }
    save_obj(ds.gt_mesh, dir + "/gt.obj");
    std::ofstream meta(dir + "/meta.txt");
    if (!meta) throw std::runtime_error("cannot write " + dir + "/meta.txt");
    meta << "shape = " << shape_name(kind) << "\n";
    meta << "views = " << ds.views.size() << "\n";
    meta << "resolution = " << resolution << "\n";
    meta << "seed = " << ds.seed << "\n";
}

Dataset load_dataset(const std::string& dir) {
    Dataset ds;
    uint64_t seed = 0;
    {
        std::ifstream meta(dir + "/meta.txt");
        if (!meta) throw std::runtime_error("cannot read " + dir + "/meta.txt");
        std::string line;
        while (std::getline(meta, line)) {
            std::istringstream ss(line);
            std::string key, eq;
            if (!(ss >> key) || key[0] == '#') continue;
            if (!(ss >> eq) || eq != "=") continue;
            if (key == "seed") ss >> seed;
        }
    }
    ds.seed = seed;
    ds.gt_mesh = load_obj(dir + "/gt.obj");
    ds.scene_scale = scene_bounds(ds.gt_mesh).bbox_diag;

    std::vector<Camera> cams = load_cameras(dir + "/cameras.txt");
    if (cams.size() < 2) throw std::runtime_error("dataset: need at least 2 cameras");
    ds.views.resize(cams.size());
    for (std::size_t i = 0; i < cams.size(); ++i) {
        ds.views[i].cam = cams[i];
        ds.views[i].rgb = load_ppm(view_path(dir, "view", static_cast<int>(i)));
        Image m3 = load_ppm(view_path(dir, "mask", static_cast<int>(i)));
        Image& m = ds.views[i].mask;
        m = Image(m3.width, m3.height, 1);
        for (int y = 0; y < m3.height; ++y)
            for (int x = 0; x < m3.width; ++x)
                m.at(x, y, 0) = m3.at(x, y, 0) >= 0.5 ? 1.0 : 0.0;
        if (ds.views[i].rgb.width != ds.views[0].rgb.width ||
            ds.views[i].rgb.height != ds.views[0].rgb.height)
            throw std::runtime_error("dataset: views disagree on resolution");
    }

    Rng rng = Rng(seed).fork(kPointStream);
    ds.gt_points = sample_surface(ds.gt_mesh, kGtSamples, rng);
    return ds;
}

}  // namespace softmesh

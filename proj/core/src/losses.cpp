#include "softmesh/losses.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace softmesh {

namespace {

void require_same_dims(const Image& a, const Image& b, const char* what) {
    if (a.width != b.width || a.height != b.height || a.channels != b.channels)
        throw std::runtime_error(std::string(what) + ": image dimensions differ (" +
                                 std::to_string(a.width) + "x" + std::to_string(a.height) + "x" +
                                 std::to_string(a.channels) + " vs " + std::to_string(b.width) +
                                 "x" + std::to_string(b.height) + "x" +
                                 std::to_string(b.channels) + ")");
}

}  // namespace

ImageLoss photometric_loss(const Image& pred, const Image& gt) {
    require_same_dims(pred, gt, "photometric loss");
    ImageLoss out;
    out.d_pred = Image(pred.width, pred.height, pred.channels);
    const double inv_n = 1.0 / static_cast<double>(pred.data.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        double diff = pred.data[i] - gt.data[i];
        sum += std::abs(diff);
        out.d_pred.data[i] = diff > 0.0 ? inv_n : (diff < 0.0 ? -inv_n : 0.0);
    }
    out.value = sum * inv_n;
    return out;
}

ImageLoss mask_loss(const Image& opacity, const Image& gt_mask) {
    require_same_dims(opacity, gt_mask, "mask loss");
    ImageLoss out;
    out.d_pred = Image(opacity.width, opacity.height, opacity.channels);
    const double inv_n = 1.0 / static_cast<double>(opacity.data.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < opacity.data.size(); ++i) {
        double diff = opacity.data[i] - gt_mask.data[i];
        sum += diff * diff;
        out.d_pred.data[i] = 2.0 * diff * inv_n;
    }
    out.value = sum * inv_n;
    return out;
}

SmoothLoss laplacian_smooth_loss(const Mesh& mesh) {
    require_valid(mesh);
    const auto nbrs = vertex_neighbors(mesh);
    const int nv = mesh.num_vertices();

    SmoothLoss out;
    out.d_vertices.assign(nv, Vec3{0, 0, 0});

    int connected = 0;
    for (int v = 0; v < nv; ++v) {
        if (nbrs[v].empty()) ++out.isolated_vertices;
        else ++connected;
    }
    if (connected == 0) return out;
    const double inv_m = 1.0 / connected;

    // residual per connected vertex: L_v = v - centroid(N(v))
    std::vector<Vec3> residual(nv, Vec3{0, 0, 0});
    for (int v = 0; v < nv; ++v) {
        if (nbrs[v].empty()) continue;
        Vec3 centroid{0, 0, 0};
        for (int u : nbrs[v]) centroid += mesh.vertices[u];
        centroid = centroid / static_cast<double>(nbrs[v].size());
        residual[v] = mesh.vertices[v] - centroid;
        out.value += norm2(residual[v]) * inv_m;
    }
    for (int v = 0; v < nv; ++v) {
        if (nbrs[v].empty()) continue;
        out.d_vertices[v] += 2.0 * inv_m * residual[v];
        const double w = 2.0 * inv_m / static_cast<double>(nbrs[v].size());
        // v's centroid pulls on each of its neighbors
        for (int u : nbrs[v]) out.d_vertices[u] -= w * residual[v];
    }
    return out;
}

}  // namespace softmesh

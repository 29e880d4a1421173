#include "softmesh/chamfer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace softmesh {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double min_dist2_over(const std::vector<Vec3>& pts, const int* ids, int count, const Vec3& q,
                      double best2) {
    for (int i = 0; i < count; ++i) {
        double d2 = norm2(q - pts[ids[i]]);
        if (d2 < best2) best2 = d2;
    }
    return best2;
}

}  // namespace

PointGrid::PointGrid(const std::vector<Vec3>& points) : points_(&points) {
    if (points.empty()) throw std::runtime_error("chamfer: empty point set");
    mn_ = mx_ = points[0];
    for (const Vec3& p : points) {
        mn_ = Vec3{std::min(mn_.x, p.x), std::min(mn_.y, p.y), std::min(mn_.z, p.z)};
        mx_ = Vec3{std::max(mx_.x, p.x), std::max(mx_.y, p.y), std::max(mx_.z, p.z)};
    }
    Vec3 ext = mx_ - mn_;
    double ex = std::max(ext.x, 1e-12), ey = std::max(ext.y, 1e-12), ez = std::max(ext.z, 1e-12);
    double max_ext = std::max({ex, ey, ez});
    // ~1 point per cell, axis counts capped to keep the table small
    h_ = std::cbrt(ex * ey * ez / static_cast<double>(points.size()));
    if (!std::isfinite(h_) || h_ <= 0.0) h_ = max_ext;
    h_ = std::max(h_, max_ext / 256.0);
    nx_ = std::clamp(static_cast<int>(std::ceil(ex / h_)), 1, 256);
    ny_ = std::clamp(static_cast<int>(std::ceil(ey / h_)), 1, 256);
    nz_ = std::clamp(static_cast<int>(std::ceil(ez / h_)), 1, 256);

    const std::size_t ncells = static_cast<std::size_t>(nx_) * ny_ * nz_;
    std::vector<int> counts(ncells + 1, 0);
    auto cell_index = [&](const Vec3& p) {
        int i = cell_of(p.x, mn_.x, nx_);
        int j = cell_of(p.y, mn_.y, ny_);
        int k = cell_of(p.z, mn_.z, nz_);
        return (static_cast<std::size_t>(k) * ny_ + j) * nx_ + i;
    };
    for (const Vec3& p : points) ++counts[cell_index(p) + 1];
    for (std::size_t c = 1; c <= ncells; ++c) counts[c] += counts[c - 1];
    cell_start_ = counts;
    cell_items_.resize(points.size());
    std::vector<int> cursor(cell_start_.begin(), cell_start_.end() - 1);
    for (std::size_t i = 0; i < points.size(); ++i)
        cell_items_[cursor[cell_index(points[i])]++] = static_cast<int>(i);
}

int PointGrid::cell_of(double x, double lo, int n) const {
    int i = static_cast<int>(std::floor((x - lo) / h_));
    return std::clamp(i, 0, n - 1);
}

double PointGrid::nearest_distance(const Vec3& q) const {
    const int ci = cell_of(q.x, mn_.x, nx_);
    const int cj = cell_of(q.y, mn_.y, ny_);
    const int ck = cell_of(q.z, mn_.z, nz_);
    const int rmax = std::max({nx_, ny_, nz_});
    double best2 = kInf;
    for (int r = 0; r <= rmax; ++r) {
        const int ilo = std::max(ci - r, 0), ihi = std::min(ci + r, nx_ - 1);
        const int jlo = std::max(cj - r, 0), jhi = std::min(cj + r, ny_ - 1);
        const int klo = std::max(ck - r, 0), khi = std::min(ck + r, nz_ - 1);
        for (int k = klo; k <= khi; ++k)
            for (int j = jlo; j <= jhi; ++j)
                for (int i = ilo; i <= ihi; ++i) {
                    if (std::max({std::abs(i - ci), std::abs(j - cj), std::abs(k - ck)}) != r)
                        continue;
                    std::size_t c = (static_cast<std::size_t>(k) * ny_ + j) * nx_ + i;
                    best2 = min_dist2_over(*points_, cell_items_.data() + cell_start_[c],
                                           cell_start_[c + 1] - cell_start_[c], q, best2);
                }
        // closest possible unscanned point sits beyond a scanned-box face
        // that is still interior to the grid
        double margin = kInf;
        if (ci - r > 0) margin = std::min(margin, q.x - (mn_.x + (ci - r) * h_));
        if (ci + r + 1 < nx_) margin = std::min(margin, mn_.x + (ci + r + 1) * h_ - q.x);
        if (cj - r > 0) margin = std::min(margin, q.y - (mn_.y + (cj - r) * h_));
        if (cj + r + 1 < ny_) margin = std::min(margin, mn_.y + (cj + r + 1) * h_ - q.y);
        if (ck - r > 0) margin = std::min(margin, q.z - (mn_.z + (ck - r) * h_));
        if (ck + r + 1 < nz_) margin = std::min(margin, mn_.z + (ck + r + 1) * h_ - q.z);
        if (margin == kInf) break;  // scanned the whole grid
        if (best2 <= margin * margin) break;
    }
    return std::sqrt(best2);
}

namespace {

template <typename NearestA, typename NearestB>
double chamfer_impl(const std::vector<Vec3>& a, const std::vector<Vec3>& b, NearestA&& to_b,
                    NearestB&& to_a) {
    if (a.empty() || b.empty()) throw std::runtime_error("chamfer: empty point set");
    double sum_a = 0.0;
    for (const Vec3& p : a) sum_a += to_b(p);
    double sum_b = 0.0;
    for (const Vec3& p : b) sum_b += to_a(p);
    return 0.5 * (sum_a / static_cast<double>(a.size()) + sum_b / static_cast<double>(b.size()));
}

double brute_nearest(const std::vector<Vec3>& pts, const Vec3& q) {
    double best2 = kInf;
    for (const Vec3& p : pts) {
        double d2 = norm2(q - p);
        if (d2 < best2) best2 = d2;
    }
    return std::sqrt(best2);
}

}  // namespace

double chamfer(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    if (a.empty() || b.empty()) throw std::runtime_error("chamfer: empty point set");
    PointGrid grid_b(b), grid_a(a);
    return chamfer_impl(
        a, b, [&](const Vec3& q) { return grid_b.nearest_distance(q); },
        [&](const Vec3& q) { return grid_a.nearest_distance(q); });
}

double chamfer_brute(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    return chamfer_impl(
        a, b, [&](const Vec3& q) { return brute_nearest(b, q); },
        [&](const Vec3& q) { return brute_nearest(a, q); });
}

std::vector<Vec3> sample_surface(const Mesh& mesh, int n, Rng& rng) {
    if (n < 1) throw std::runtime_error("sample_surface: need n >= 1");
    require_valid(mesh);
    std::vector<double> cdf(mesh.num_faces());
    double total = 0.0;
    for (int f = 0; f < mesh.num_faces(); ++f) {
        total += face_area(mesh, f);
        cdf[f] = total;
    }
    if (!(total > 0.0)) throw std::runtime_error("sample_surface: mesh has zero surface area");

    std::vector<Vec3> out;
    out.reserve(n);
    for (int s = 0; s < n; ++s) {
        double u = rng.uniform() * total;
        int f = static_cast<int>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        if (f >= mesh.num_faces()) f = mesh.num_faces() - 1;
        double r1 = rng.uniform(), r2 = rng.uniform();
        double sq = std::sqrt(r1);
        double b0 = 1.0 - sq, b1 = sq * (1.0 - r2), b2 = sq * r2;
        const auto& t = mesh.faces[f];
        out.push_back(b0 * mesh.vertices[t[0]] + b1 * mesh.vertices[t[1]] +
                      b2 * mesh.vertices[t[2]]);
    }
    return out;
}

}  // namespace softmesh

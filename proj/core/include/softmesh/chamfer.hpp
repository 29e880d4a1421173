#pragma once

#include <vector>

#include "softmesh/mesh.hpp"
#include "softmesh/rng.hpp"
#include "softmesh/vec3.hpp"

namespace softmesh {

// Uniform spatial hash over a fixed point set answering exact nearest
// neighbors: cells are scanned in expanding Chebyshev rings until no
// unscanned cell can hold a closer point.
class PointGrid {
  public:
    explicit PointGrid(const std::vector<Vec3>& points);
    double nearest_distance(const Vec3& query) const;

  private:
    int cell_of(double x, double lo, int n) const;

    const std::vector<Vec3>* points_;
    Vec3 mn_, mx_;
    double h_ = 1.0;
    int nx_ = 1, ny_ = 1, nz_ = 1;
    std::vector<int> cell_start_;  // CSR over cells
    std::vector<int> cell_items_;
};

// Half the sum of mean nearest-neighbor Euclidean distances, each direction.
// Exactly equal to chamfer_brute by construction.
double chamfer(const std::vector<Vec3>& a, const std::vector<Vec3>& b);
double chamfer_brute(const std::vector<Vec3>& a, const std::vector<Vec3>& b);

// Area-weighted surface samples with uniform barycentric draws.
std::vector<Vec3> sample_surface(const Mesh& mesh, int n, Rng& rng);

}  // namespace softmesh

#pragma once

#include <vector>

#include "softmesh/image.hpp"
#include "softmesh/mesh.hpp"

namespace softmesh {

struct ImageLoss {
    double value = 0.0;
    Image d_pred;  // gradient wrt the predicted image
};

// Mean absolute error over pixels x channels; gradient is sign/(W*H*C).
ImageLoss photometric_loss(const Image& pred, const Image& gt);

// Mean squared error between opacity and a {0,1} mask.
ImageLoss mask_loss(const Image& opacity, const Image& gt_mask);

struct SmoothLoss {
    double value = 0.0;
    std::vector<Vec3> d_vertices;
    int isolated_vertices = 0;  // excluded from the mean
};

// Mean over connected vertices of ||v - centroid(1-ring)||^2. The gradient
// carries both the center term and each vertex's appearance in its
// neighbors' centroids.
SmoothLoss laplacian_smooth_loss(const Mesh& mesh);

struct LossBreakdown {
    double photometric = 0.0, mask = 0.0, smooth = 0.0, total = 0.0;
};

}  // namespace softmesh

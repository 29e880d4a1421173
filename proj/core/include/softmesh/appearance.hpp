#pragma once

#include <algorithm>
#include <cmath>

#include "softmesh/vec3.hpp"

namespace softmesh {

// Raw per-vertex color channel -> display value in (0,1).
inline double squash_channel(double raw) { return 1.0 / (1.0 + std::exp(-raw)); }

inline Vec3 squash_color(const Vec3& raw) {
    return {squash_channel(raw.x), squash_channel(raw.y), squash_channel(raw.z)};
}

// d(squash)/d(raw) = c(1-c).
inline double squash_channel_grad(double raw) {
    double c = squash_channel(raw);
    return c * (1.0 - c);
}

// Inverse squash for file IO; inputs clamped into the open interval.
inline double unsquash_channel(double c) {
    double cc = std::clamp(c, 1e-9, 1.0 - 1e-9);
    return std::log(cc / (1.0 - cc));
}

inline Vec3 unsquash_color(const Vec3& c) {
    return {unsquash_channel(c.x), unsquash_channel(c.y), unsquash_channel(c.z)};
}

}  // namespace softmesh

#pragma once

#include <optional>

#include "softmesh/constants.hpp"
#include "softmesh/vec3.hpp"

namespace softmesh {

struct RayHit {
    double t;        // ray parameter (unclipped; caller applies near/far)
    Vec3 bary;       // weights of the three triangle vertices, sum 1
};

// Moller-Trumbore. direction must be unit length. Returns nothing for
// parallel rays and for hits outside the triangle beyond kEpsBary.
inline std::optional<RayHit> ray_triangle_intersect(const Vec3& origin, const Vec3& dir,
                                                    const Vec3& a, const Vec3& b,
                                                    const Vec3& c) {
    Vec3 e1 = b - a, e2 = c - a;
    Vec3 p = cross(dir, e2);
    double det = dot(e1, p);
    if (det == 0.0) return std::nullopt;
    double inv = 1.0 / det;
    Vec3 s = origin - a;
    double u = dot(s, p) * inv;
    if (u < -kEpsBary || u > 1.0 + kEpsBary) return std::nullopt;
    Vec3 q = cross(s, e1);
    double v = dot(dir, q) * inv;
    if (v < -kEpsBary || u + v > 1.0 + kEpsBary) return std::nullopt;
    double t = dot(e2, q) * inv;
    return RayHit{t, Vec3{1.0 - u - v, u, v}};
}

}  // namespace softmesh

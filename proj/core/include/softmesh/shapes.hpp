#pragma once

#include <cstdint>

#include "softmesh/mesh.hpp"

namespace softmesh {

// Unit-style primitives used by tests and the synthetic dataset generator.
// All are watertight, outward-oriented, and carry no colors.

Mesh make_box(const Vec3& min_corner, const Vec3& max_corner);

// Subdivided icosahedron projected to the sphere. subdivisions=0 gives the
// raw icosahedron (12 vertices, 20 faces); each level quadruples faces.
Mesh make_icosphere(const Vec3& center, double radius, int subdivisions);

// Ring grid torus: nu segments around the major circle, nv around the tube.
Mesh make_torus(const Vec3& center, double major_radius, double minor_radius,
                int nu, int nv);

// Sphere displaced by smooth low-frequency radial noise drawn from the seed;
// stays star-shaped (genus 0) for amplitude < 1.
Mesh make_blob(const Vec3& center, double radius, double amplitude, int subdivisions,
               uint64_t seed);

}  // namespace softmesh

#pragma once

#include <string>
#include <vector>

#include "softmesh/vec3.hpp"

namespace softmesh {

// OpenCV-style pinhole: x_cam = R*x_world + t, z forward, u right, v down.
struct Camera {
    Mat3 rotation;       // world-to-camera
    Vec3 translation;
    double fx = 1.0, fy = 1.0;
    double cx = 0.0, cy = 0.0;
    int width = 1, height = 1;
    double near = 0.01, far = 100.0;
};

struct Projected {
    double u, v, z;  // pixels, pixels, camera depth in meters
};

// Throws std::runtime_error on non-orthonormal rotation or bad clip range.
void require_valid(const Camera& cam);

Projected project(const Camera& cam, const Vec3& point);

// Inverse of project for z > 0.
Vec3 unproject(const Camera& cam, double u, double v, double z);

// Camera center in world space.
Vec3 camera_center(const Camera& cam);

// World-space unit ray through the center of pixel (px, py); pixel (0,0)'s
// center is at image coordinates (0.5, 0.5).
struct Ray {
    Vec3 origin;
    Vec3 direction;
};
Ray pixel_ray(const Camera& cam, int px, int py);

// Rigid look-at: eye toward target, with an up hint (not required orthogonal).
Camera make_look_at(const Vec3& eye, const Vec3& target, const Vec3& up,
                    double fx, double fy, int width, int height,
                    double near, double far);

// One camera per line: fx fy cx cy w h near far r00..r22 t0 t1 t2.
std::vector<Camera> load_cameras(const std::string& path);
void save_cameras(const std::vector<Camera>& cams, const std::string& path);

}  // namespace softmesh

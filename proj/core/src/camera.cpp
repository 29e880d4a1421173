#include "softmesh/camera.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "softmesh/text_format.hpp"

namespace softmesh {

void require_valid(const Camera& cam) {
    // R^T R = I within 1e-6
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += cam.rotation(k, i) * cam.rotation(k, j);
            double expect = (i == j) ? 1.0 : 0.0;
            if (std::abs(s - expect) > 1e-6)
                throw std::runtime_error("camera: rotation not orthonormal");
        }
    if (!(cam.near > 0.0 && cam.near < cam.far))
        throw std::runtime_error("camera: need 0 < near < far");
    if (cam.width < 1 || cam.height < 1)
        throw std::runtime_error("camera: non-positive resolution");
}

Projected project(const Camera& cam, const Vec3& point) {
    Vec3 pc = cam.rotation * point + cam.translation;
    return {cam.fx * pc.x / pc.z + cam.cx, cam.fy * pc.y / pc.z + cam.cy, pc.z};
}

Vec3 unproject(const Camera& cam, double u, double v, double z) {
    Vec3 pc{(u - cam.cx) * z / cam.fx, (v - cam.cy) * z / cam.fy, z};
    return cam.rotation.transposed_mul(pc - cam.translation);
}

Vec3 camera_center(const Camera& cam) {
    return cam.rotation.transposed_mul(-cam.translation);
}

Ray pixel_ray(const Camera& cam, int px, int py) {
    double u = px + 0.5, v = py + 0.5;
    Vec3 dir_cam{(u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0};
    Vec3 dir = cam.rotation.transposed_mul(dir_cam);
    return {camera_center(cam), normalized(dir)};
}

Camera make_look_at(const Vec3& eye, const Vec3& target, const Vec3& up,
                    double fx, double fy, int width, int height,
                    double near, double far) {
    Vec3 fwd = normalized(target - eye);                  // camera +z
    Vec3 right = normalized(cross(fwd, up));              // camera +x (v axis is down)
    Vec3 down = cross(fwd, right);                        // camera +y
    Camera cam;
    cam.rotation.row = {right, down, fwd};
    cam.translation = -(cam.rotation * eye);
    cam.fx = fx;
    cam.fy = fy;
    cam.cx = width * 0.5;
    cam.cy = height * 0.5;
    cam.width = width;
    cam.height = height;
    cam.near = near;
    cam.far = far;
    return cam;
}

std::vector<Camera> load_cameras(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cameras: cannot open " + path);
    std::vector<Camera> cams;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        double v[20];
        for (int i = 0; i < 20; ++i) {
            if (!(ss >> v[i]))
                throw std::runtime_error("cameras: parse error at " + path + ":" +
                                         std::to_string(lineno));
        }
        Camera c;
        c.fx = v[0];
        c.fy = v[1];
        c.cx = v[2];
        c.cy = v[3];
        c.width = static_cast<int>(v[4]);
        c.height = static_cast<int>(v[5]);
        c.near = v[6];
        c.far = v[7];
        for (int r = 0; r < 3; ++r)
            for (int k = 0; k < 3; ++k) c.rotation(r, k) = v[8 + 3 * r + k];
        c.translation = {v[17], v[18], v[19]};
        require_valid(c);
        cams.push_back(c);
    }
    return cams;
}

void save_cameras(const std::vector<Camera>& cams, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cameras: cannot write " + path);
    for (const auto& c : cams) {
        out << fmt_g9(c.fx) << ' ' << fmt_g9(c.fy) << ' ' << fmt_g9(c.cx) << ' '
            << fmt_g9(c.cy) << ' ' << c.width << ' ' << c.height << ' '
            << fmt_g9(c.near) << ' ' << fmt_g9(c.far);
        for (int r = 0; r < 3; ++r)
            for (int k = 0; k < 3; ++k) out << ' ' << fmt_g9(c.rotation(r, k));
        out << ' ' << fmt_g9(c.translation.x) << ' ' << fmt_g9(c.translation.y) << ' '
            << fmt_g9(c.translation.z) << '\n';
    }
}

}  // namespace softmesh

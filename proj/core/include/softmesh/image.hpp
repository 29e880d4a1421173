#pragma once

#include <string>
#include <vector>

namespace softmesh {

// Row-major float image, values in [0,1]; channels 3 (RGB) or 1 (mask).
struct Image {
    int width = 0, height = 0, channels = 0;
    std::vector<double> data;

    Image() = default;
    Image(int w, int h, int c) : width(w), height(h), channels(c),
                                 data(static_cast<std::size_t>(w) * h * c, 0.0) {}

    double& at(int x, int y, int c) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    double at(int x, int y, int c) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
};

// Binary PPM, maxval 255, rounded from floats. 1-channel images are written
// as gray RGB. Lossless values go to the .f32 sidecar.
void save_ppm(const Image& img, const std::string& path);
Image load_ppm(const std::string& path);  // always 3-channel

// Headerless raw little-endian float32, row-major; dimensions travel with the
// paired PPM, so loading takes them explicitly.
void save_f32(const Image& img, const std::string& path);
Image load_f32(const std::string& path, int width, int height, int channels);

double max_abs_diff(const Image& a, const Image& b);

}  // namespace softmesh

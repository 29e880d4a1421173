#include "softmesh/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace softmesh {

namespace {

uint8_t to_byte(double v) {
    double s = std::round(std::clamp(v, 0.0, 1.0) * 255.0);
    return static_cast<uint8_t>(s);
}

}  // namespace

void save_ppm(const Image& img, const std::string& path) {
    if (img.channels != 1 && img.channels != 3)
        throw std::runtime_error("ppm: unsupported channel count");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("ppm: cannot write " + path);
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    std::vector<uint8_t> row(static_cast<std::size_t>(img.width) * 3);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < 3; ++c) {
                int sc = img.channels == 3 ? c : 0;
                row[3 * x + c] = to_byte(img.at(x, y, sc));
            }
        }
        out.write(reinterpret_cast<const char*>(row.data()), row.size());
    }
}

Image load_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("ppm: cannot open " + path);
    std::string magic;
    in >> magic;
    if (magic != "P6") throw std::runtime_error("ppm: not P6: " + path);
    auto next_token = [&]() {
        // skip whitespace and # comments
        int ch;
        while ((ch = in.peek()) != EOF) {
            if (ch == '#') {
                std::string dummy;
                std::getline(in, dummy);
            } else if (std::isspace(ch)) {
                in.get();
            } else {
                break;
            }
        }
        long v;
        if (!(in >> v)) throw std::runtime_error("ppm: bad header in " + path);
        return v;
    };
    long w = next_token(), h = next_token(), maxval = next_token();
    if (maxval != 255) throw std::runtime_error("ppm: only maxval 255 supported");
    in.get();  // single whitespace before raster
    Image img(static_cast<int>(w), static_cast<int>(h), 3);
    std::vector<uint8_t> raster(static_cast<std::size_t>(w) * h * 3);
    in.read(reinterpret_cast<char*>(raster.data()), raster.size());
    if (static_cast<std::size_t>(in.gcount()) != raster.size())
        throw std::runtime_error("ppm: truncated raster in " + path);
    for (std::size_t i = 0; i < raster.size(); ++i) img.data[i] = raster[i] / 255.0;
    return img;
}

void save_f32(const Image& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("f32: cannot write " + path);
    std::vector<float> buf(img.data.begin(), img.data.end());
    out.write(reinterpret_cast<const char*>(buf.data()), buf.size() * sizeof(float));
}

Image load_f32(const std::string& path, int width, int height, int channels) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("f32: cannot open " + path);
    Image img(width, height, channels);
    std::vector<float> buf(img.data.size());
    in.read(reinterpret_cast<char*>(buf.data()), buf.size() * sizeof(float));
    if (static_cast<std::size_t>(in.gcount()) != buf.size() * sizeof(float) ||
        in.peek() != std::ifstream::traits_type::eof())
        throw std::runtime_error("f32: size mismatch in " + path);
    std::copy(buf.begin(), buf.end(), img.data.begin());
    return img;
}

double max_abs_diff(const Image& a, const Image& b) {
    if (a.width != b.width || a.height != b.height || a.channels != b.channels)
        throw std::runtime_error("image: dimension mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

}  // namespace softmesh

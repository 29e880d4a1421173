#include "softmesh/obj_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "softmesh/appearance.hpp"
#include "softmesh/text_format.hpp"

namespace softmesh {

namespace {

[[noreturn]] void parse_error(const std::string& path, int line, const std::string& what) {
    throw std::runtime_error("obj: " + path + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

Mesh load_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("obj: cannot open " + path);
    Mesh mesh;
    bool any_colors = false;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        std::string kw;
        if (!(ss >> kw)) continue;  // blank
        if (kw[0] == '#') continue;
        if (kw == "vc") parse_error(path, lineno, "vc color directive not supported");
        if (kw == "v") {
            double x, y, z;
            if (!(ss >> x >> y >> z)) parse_error(path, lineno, "vertex needs 3 coordinates");
            mesh.vertices.push_back({x, y, z});
            double r, g, b;
            if (ss >> r) {
                if (!(ss >> g >> b)) parse_error(path, lineno, "vertex color needs 3 values");
                mesh.colors.push_back(unsquash_color({r, g, b}));
                any_colors = true;
            } else {
                mesh.colors.push_back({0, 0, 0});
            }
            std::string extra;
            if (ss.clear(), ss >> extra) parse_error(path, lineno, "trailing tokens on vertex");
        } else if (kw == "f") {
            std::string t[3];
            if (!(ss >> t[0] >> t[1] >> t[2])) parse_error(path, lineno, "face needs 3 indices");
            std::string extra;
            if (ss >> extra) parse_error(path, lineno, "only triangles supported");
            std::array<int, 3> tri;
            for (int k = 0; k < 3; ++k) {
                if (t[k].find('/') != std::string::npos)
                    parse_error(path, lineno, "index forms with '/' not supported");
                std::size_t pos = 0;
                int idx;
                try {
                    idx = std::stoi(t[k], &pos);
                } catch (const std::exception&) {
                    parse_error(path, lineno, "bad face index '" + t[k] + "'");
                }
                if (pos != t[k].size()) parse_error(path, lineno, "bad face index '" + t[k] + "'");
                tri[k] = idx - 1;  // 1-based on disk
            }
            mesh.faces.push_back(tri);
        } else {
            parse_error(path, lineno, "unsupported directive '" + kw + "'");
        }
    }
    if (!any_colors) mesh.colors.clear();
    const int nv = mesh.num_vertices();
    for (std::size_t f = 0; f < mesh.faces.size(); ++f)
        for (int k = 0; k < 3; ++k) {
            int idx = mesh.faces[f][k];
            if (idx < 0 || idx >= nv)
                throw std::runtime_error("obj: " + path + ": face " + std::to_string(f + 1) +
                                         " index " + std::to_string(idx + 1) +
                                         " out of range (have " + std::to_string(nv) +
                                         " vertices)");
        }
    require_valid(mesh);
    return mesh;
}

void save_obj(const Mesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("obj: cannot write " + path);
    const bool colors = !mesh.colors.empty();
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        const Vec3& p = mesh.vertices[v];
        out << "v " << fmt_g9(p.x) << ' ' << fmt_g9(p.y) << ' ' << fmt_g9(p.z);
        if (colors) {
            Vec3 c = squash_color(mesh.colors[v]);
            out << ' ' << fmt_g9(c.x) << ' ' << fmt_g9(c.y) << ' ' << fmt_g9(c.z);
        }
        out << '\n';
    }
    for (const auto& t : mesh.faces)
        out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

}  // namespace softmesh

#pragma once

#include <string>

#include "softmesh/mesh.hpp"

namespace softmesh {

// Minimal ASCII OBJ: `v x y z` (optionally `v x y z r g b`), `f i j k` with
// 1-based plain indices, `#` comments. Anything else is a parse error; the
// nonstandard `vc` color directive is rejected by name. Colors in the file
// are display values in [0,1]; the mesh stores raw (pre-squash) values, so
// IO applies the logistic map and its inverse.
Mesh load_obj(const std::string& path);
void save_obj(const Mesh& mesh, const std::string& path);

}  // namespace softmesh

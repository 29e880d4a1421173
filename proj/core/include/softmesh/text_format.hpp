#pragma once

#include <cstdio>
#include <string>

namespace softmesh {

// All human-readable floats are written with 9 significant digits so files
// are stable across runs and platforms.
inline std::string fmt_g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace softmesh

#pragma once

namespace softmesh {

// Faces below this area are flagged degenerate and skipped by renderers.
inline constexpr double kEpsArea = 1e-12;

// Barycentric tolerance for inside tests.
inline constexpr double kEpsBary = 1e-9;

// Alpha ceiling; the s<0 branch of the sdf->alpha map exceeds 1 for beta < 1.
inline constexpr double kAlphaMax = 0.999;

// Floor of the softplus-parameterized beta.
inline constexpr double kBetaMin = 1e-4;

// Compositing stops once transmittance falls below this (off in gradient-check mode).
inline constexpr double kEarlyTermT = 1e-4;

// Per-pixel fragment budget; nearest fragments win.
inline constexpr int kFragCap = 64;

// Tile edge in pixels.
inline constexpr int kTileSize = 16;

// Layer offsets are clamped away from zero at this fraction of delta.
inline constexpr double kEpsOffsetFrac = 1e-3;

}  // namespace softmesh

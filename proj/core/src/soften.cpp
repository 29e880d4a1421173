#include "softmesh/soften.hpp"

#include <cmath>
#include <stdexcept>

#include "softmesh/appearance.hpp"
#include "softmesh/constants.hpp"

namespace softmesh {

namespace {

double softplus(double b) {
    return b > 0.0 ? b + std::log1p(std::exp(-b)) : std::log1p(std::exp(b));
}

double sigmoid(double b) { return 1.0 / (1.0 + std::exp(-b)); }

}  // namespace

double beta_of(const AlphaParams& p) { return kBetaMin + softplus(p.b); }

double dbeta_db(const AlphaParams& p) { return sigmoid(p.b); }

AlphaParams alpha_params_for_beta(double beta) {
    if (!(beta > kBetaMin))
        throw std::runtime_error("beta must exceed the floor " + std::to_string(kBetaMin));
    double y = beta - kBetaMin;
    return AlphaParams{y > 30.0 ? y : std::log(std::expm1(y))};
}

std::vector<double> draw_offsets(int n, double delta, Rng& rng) {
    if (n < 1) throw std::runtime_error("soften: need at least one layer");
    if (delta <= 0.0) throw std::runtime_error("soften: delta must be positive");
    const double eps = kEpsOffsetFrac * delta;
    std::vector<double> offsets(n);
    for (int i = 0; i < n; ++i) {
        double lo = -delta + 2.0 * delta * i / n;
        double hi = -delta + 2.0 * delta * (i + 1) / n;
        double d = rng.uniform(lo, hi);
        if (d >= 0.0 && d < eps) d = eps;
        if (d < 0.0 && d > -eps) d = -eps;
        offsets[i] = d;
    }
    return offsets;
}

LayerSet make_layer_set(const Mesh& base, const std::vector<double>& offsets) {
    LayerSet ls;
    ls.base = &base;
    ls.num_layers = static_cast<int>(offsets.size());
    ls.offsets = offsets;
    auto vn = compute_vertex_normals(base);
    ls.normals = std::move(vn.normals);
    ls.normal_flagged = std::move(vn.flagged);
    ls.face_degenerate = degenerate_flags(base);
    const int nv = base.num_vertices();
    ls.layer_vertices.resize(ls.num_layers);
    ls.signed_dists.resize(ls.num_layers);
    ls.alphas.assign(ls.num_layers, std::vector<double>(nv, 0.0));
    for (int i = 0; i < ls.num_layers; ++i) {
        ls.layer_vertices[i].resize(nv);
        ls.signed_dists[i].assign(nv, offsets[i]);
        for (int j = 0; j < nv; ++j)
            ls.layer_vertices[i][j] = base.vertices[j] + offsets[i] * ls.normals[j];
    }
    ls.display_colors.resize(nv);
    for (int j = 0; j < nv; ++j)
        ls.display_colors[j] =
            base.colors.empty() ? Vec3{0.5, 0.5, 0.5} : squash_color(base.colors[j]);
    return ls;
}

LayerSet sample_layers(const Mesh& base, int n, double delta, Rng& rng) {
    return make_layer_set(base, draw_offsets(n, delta, rng));
}

void refresh_signed_dists(LayerSet& ls, const std::vector<Vec3>& base_positions) {
    for (int i = 0; i < ls.num_layers; ++i) {
        double sign = ls.offsets[i] >= 0.0 ? 1.0 : -1.0;
        for (std::size_t j = 0; j < base_positions.size(); ++j)
            ls.signed_dists[i][j] = sign * norm(ls.layer_vertices[i][j] - base_positions[j]);
    }
}

std::vector<Vec3> signed_distance_backward(const LayerSet& ls,
                                           const std::vector<std::vector<double>>& dL_ds) {
    std::vector<Vec3> grad(ls.normals.size(), Vec3{0, 0, 0});
    for (int i = 0; i < ls.num_layers; ++i)
        for (std::size_t j = 0; j < grad.size(); ++j)
            grad[j] += dL_ds[i][j] * -ls.normals[j];
    return grad;
}

double sdf_to_alpha(double s, const AlphaParams& p) {
    double beta = beta_of(p);
    double raw = s < 0.0 ? (1.0 / beta) * (1.0 - 0.5 * std::exp(s / beta))
                         : (0.5 / beta) * std::exp(-s / beta);
    if (raw < 0.0) return 0.0;
    if (raw > kAlphaMax) return kAlphaMax;
    return raw;
}

AlphaGrad sdf_to_alpha_backward(double s, const AlphaParams& p, double dL_dalpha) {
    double beta = beta_of(p);
    double raw, d_s, d_beta;
    if (s < 0.0) {
        double e = std::exp(s / beta);
        raw = (1.0 / beta) * (1.0 - 0.5 * e);
        d_s = -e / (2.0 * beta * beta);
        d_beta = -(1.0 - 0.5 * e) / (beta * beta) + s * e / (2.0 * beta * beta * beta);
    } else {
        double e = std::exp(-s / beta);
        raw = (0.5 / beta) * e;
        d_s = -0.5 * e / (beta * beta);
        d_beta = 0.5 * e / (beta * beta) * (s / beta - 1.0);
    }
    if (raw < 0.0 || raw > kAlphaMax) return {0.0, 0.0};
    return {dL_dalpha * d_s, dL_dalpha * d_beta * dbeta_db(p)};
}

void compute_alphas(LayerSet& ls, const AlphaParams& p) {
    for (int i = 0; i < ls.num_layers; ++i)
        for (std::size_t j = 0; j < ls.signed_dists[i].size(); ++j)
            ls.alphas[i][j] = sdf_to_alpha(ls.signed_dists[i][j], p);
}

void refresh_display_colors(LayerSet& ls, const std::vector<Vec3>& raw_colors) {
    for (std::size_t j = 0; j < raw_colors.size(); ++j)
        ls.display_colors[j] = squash_color(raw_colors[j]);
}

}  // namespace softmesh

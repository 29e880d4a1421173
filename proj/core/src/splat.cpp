#include "softmesh/splat.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "softmesh/appearance.hpp"
#include "softmesh/intersect.hpp"
#include "softmesh/parallel.hpp"

namespace softmesh {

namespace {

struct ProjectedLayers {
    std::vector<std::vector<Projected>> proj;   // [layer][vertex]
    std::vector<std::vector<uint8_t>> culled;   // [layer][face]
    long near_culled = 0;
};

ProjectedLayers project_layers(const LayerSet& ls, const Camera& cam) {
    ProjectedLayers out;
    const Mesh& base = *ls.base;
    out.proj.resize(ls.num_layers);
    out.culled.assign(ls.num_layers, std::vector<uint8_t>(base.num_faces(), 0));
    for (int l = 0; l < ls.num_layers; ++l) {
        out.proj[l].resize(base.num_vertices());
        for (int v = 0; v < base.num_vertices(); ++v)
            out.proj[l][v] = project(cam, ls.layer_vertices[l][v]);
    }
    for (int l = 0; l < ls.num_layers; ++l)
        for (int f = 0; f < base.num_faces(); ++f) {
            if (ls.face_degenerate[f]) {
                out.culled[l][f] = 1;
                continue;
            }
            const auto& t = base.faces[f];
            int behind = 0;
            for (int k = 0; k < 3; ++k)
                if (out.proj[l][t[k]].z <= cam.near) ++behind;
            if (behind > 0) {
                out.culled[l][f] = 1;
                if (behind < 3) ++out.near_culled;
            }
        }
    return out;
}

TileBins bin_impl(const ProjectedLayers& pl, const LayerSet& ls, const Camera& cam,
                  int tile) {
    TileBins bins;
    bins.tiles_x = (cam.width + tile - 1) / tile;
    bins.tiles_y = (cam.height + tile - 1) / tile;
    bins.tris.assign(static_cast<std::size_t>(bins.tiles_x) * bins.tiles_y, {});
    bins.near_culled = pl.near_culled;
    for (int l = 0; l < ls.num_layers; ++l)
        for (int f = 0; f < ls.base->num_faces(); ++f) {
            if (pl.culled[l][f]) continue;
            const auto& t = ls.base->faces[f];
            const Projected& p0 = pl.proj[l][t[0]];
            const Projected& p1 = pl.proj[l][t[1]];
            const Projected& p2 = pl.proj[l][t[2]];
            double minu = std::min({p0.u, p1.u, p2.u}), maxu = std::max({p0.u, p1.u, p2.u});
            double minv = std::min({p0.v, p1.v, p2.v}), maxv = std::max({p0.v, p1.v, p2.v});
            if (maxu < 0.0 || minu >= cam.width || maxv < 0.0 || minv >= cam.height) continue;
            int tx0 = std::max(0, static_cast<int>(std::floor(minu / tile)));
            int tx1 = std::min(bins.tiles_x - 1, static_cast<int>(std::floor(maxu / tile)));
            int ty0 = std::max(0, static_cast<int>(std::floor(minv / tile)));
            int ty1 = std::min(bins.tiles_y - 1, static_cast<int>(std::floor(maxv / tile)));
            for (int ty = ty0; ty <= ty1; ++ty)
                for (int tx = tx0; tx <= tx1; ++tx)
                    bins.tris[static_cast<std::size_t>(ty) * bins.tiles_x + tx].push_back({l, f});
        }
    return bins;
}

bool frag_less(const CachedFragment& a, const CachedFragment& b) {
    if (a.z != b.z) return a.z < b.z;
    if (a.layer != b.layer) return a.layer < b.layer;
    return a.face < b.face;
}

// Interpolated alpha is clamped back into [0, kAlphaMax]: barycentrics may
// carry -kEpsBary slack. Gradient is blocked only when the raw value is
// strictly outside.
FragAC interp_fragment(const CachedFragment& fr, const LayerSet& ls, bool* clamped = nullptr) {
    const auto& t = ls.base->faces[fr.face];
    const auto& al = ls.alphas[fr.layer];
    double a = fr.w[0] * al[t[0]] + fr.w[1] * al[t[1]] + fr.w[2] * al[t[2]];
    bool out_of_range = a < 0.0 || a > kAlphaMax;
    if (clamped) *clamped = out_of_range;
    a = std::clamp(a, 0.0, kAlphaMax);
    Vec3 c = fr.w[0] * ls.display_colors[t[0]] + fr.w[1] * ls.display_colors[t[1]] +
             fr.w[2] * ls.display_colors[t[2]];
    return {a, c};
}

struct TileRaster {
    int x0 = 0, y0 = 0, w = 0, h = 0;
    std::vector<std::vector<CachedFragment>> pixels;  // local row-major
};

void raster_tile(std::size_t ti, const TileBins& bins, const ProjectedLayers& pl,
                 const LayerSet& ls, const Camera& cam, const RenderOptions& opts,
                 TileRaster& out) {
    const int tile = opts.tile_size;
    int tx = static_cast<int>(ti) % bins.tiles_x, ty = static_cast<int>(ti) / bins.tiles_x;
    out.x0 = tx * tile;
    out.y0 = ty * tile;
    out.w = std::min(tile, cam.width - out.x0);
    out.h = std::min(tile, cam.height - out.y0);
    out.pixels.assign(static_cast<std::size_t>(out.w) * out.h, {});
    for (const auto& [l, f] : bins.tris[ti]) {
        const auto& t = ls.base->faces[f];
        const Projected& p0 = pl.proj[l][t[0]];
        const Projected& p1 = pl.proj[l][t[1]];
        const Projected& p2 = pl.proj[l][t[2]];
        double area = (p1.u - p0.u) * (p2.v - p0.v) - (p2.u - p0.u) * (p1.v - p0.v);
        if (area == 0.0) continue;
        double inv_area = 1.0 / area;
        double minu = std::min({p0.u, p1.u, p2.u}), maxu = std::max({p0.u, p1.u, p2.u});
        double minv = std::min({p0.v, p1.v, p2.v}), maxv = std::max({p0.v, p1.v, p2.v});
        int px0 = std::max(out.x0, static_cast<int>(std::ceil(minu - 0.5)));
        int px1 = std::min(out.x0 + out.w - 1, static_cast<int>(std::floor(maxu - 0.5)));
        int py0 = std::max(out.y0, static_cast<int>(std::ceil(minv - 0.5)));
        int py1 = std::min(out.y0 + out.h - 1, static_cast<int>(std::floor(maxv - 0.5)));
        for (int py = py0; py <= py1; ++py) {
            double v = py + 0.5;
            for (int px = px0; px <= px1; ++px) {
                double u = px + 0.5;
                double w0 = ((p1.u - u) * (p2.v - v) - (p2.u - u) * (p1.v - v)) * inv_area;
                if (w0 < -kEpsBary) continue;
                double w1 = ((p2.u - u) * (p0.v - v) - (p0.u - u) * (p2.v - v)) * inv_area;
                if (w1 < -kEpsBary) continue;
                double w2 = ((p0.u - u) * (p1.v - v) - (p1.u - u) * (p0.v - v)) * inv_area;
                if (w2 < -kEpsBary) continue;
                double zinv = w0 / p0.z + w1 / p1.z + w2 / p2.z;
                double z = 1.0 / zinv;
                if (z <= cam.near || z >= cam.far) continue;
                CachedFragment fr{l, f, z,
                                  {w0 / p0.z * z, w1 / p1.z * z, w2 / p2.z * z}};
                out.pixels[static_cast<std::size_t>(py - out.y0) * out.w + (px - out.x0)]
                    .push_back(fr);
            }
        }
    }
    for (auto& list : out.pixels) {
        std::sort(list.begin(), list.end(), frag_less);
        if (static_cast<int>(list.size()) > opts.frag_cap) list.resize(opts.frag_cap);
    }
}

ForwardCache assemble_cache(const std::vector<TileRaster>& tiles, const Camera& cam,
                            int tile, int tiles_x) {
    ForwardCache cache;
    cache.width = cam.width;
    cache.height = cam.height;
    cache.offsets.assign(static_cast<std::size_t>(cam.width) * cam.height + 1, 0);
    std::size_t total = 0;
    for (int y = 0; y < cam.height; ++y)
        for (int x = 0; x < cam.width; ++x) {
            const TileRaster& tr = tiles[static_cast<std::size_t>(y / tile) * tiles_x + x / tile];
            total += tr.pixels[static_cast<std::size_t>(y - tr.y0) * tr.w + (x - tr.x0)].size();
            cache.offsets[static_cast<std::size_t>(y) * cam.width + x + 1] =
                static_cast<int>(total);
        }
    cache.frags.reserve(total);
    for (int y = 0; y < cam.height; ++y)
        for (int x = 0; x < cam.width; ++x) {
            const TileRaster& tr = tiles[static_cast<std::size_t>(y / tile) * tiles_x + x / tile];
            const auto& list = tr.pixels[static_cast<std::size_t>(y - tr.y0) * tr.w + (x - tr.x0)];
            cache.frags.insert(cache.frags.end(), list.begin(), list.end());
        }
    return cache;
}

void require_finite_upstream(const Image& img, const char* what) {
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c)
                if (!std::isfinite(img.at(x, y, c)))
                    throw std::runtime_error(std::string("render backward: non-finite ") + what +
                                             " gradient at pixel (" + std::to_string(x) + ", " +
                                             std::to_string(y) + ")");
}

}  // namespace

TileBins bin_triangles(const LayerSet& layers, const Camera& cam, const RenderOptions& opts) {
    return bin_impl(project_layers(layers, cam), layers, cam, opts.tile_size);
}

CompositeResult composite(const std::vector<FragAC>& frags, const RenderOptions& opts) {
    CompositeResult r;
    r.weights.assign(frags.size(), 0.0);
    double T = 1.0;
    for (std::size_t i = 0; i < frags.size(); ++i) {
        if (!opts.gradient_check_mode && T < opts.early_term) break;
        double w = frags[i].alpha * T;
        r.weights[i] = w;
        r.color += w * frags[i].color;
        r.opacity += w;
        T *= 1.0 - frags[i].alpha;
    }
    r.transmittance = T;
    return r;
}

std::vector<FragGrad> composite_backward(const std::vector<FragAC>& frags,
                                         const RenderOptions& opts, const Vec3& dL_dcolor,
                                         double dL_dopacity) {
    const std::size_t n = frags.size();
    std::vector<double> tvals(n, 0.0), wvals(n, 0.0);
    double T = 1.0;
    std::size_t m = n;  // fragments actually composited
    for (std::size_t i = 0; i < n; ++i) {
        if (!opts.gradient_check_mode && T < opts.early_term) {
            m = i;
            break;
        }
        tvals[i] = T;
        wvals[i] = frags[i].alpha * T;
        T *= 1.0 - frags[i].alpha;
    }
    std::vector<FragGrad> g(n);
    double suffix = 0.0;  // sum over later fragments of u_j * w_j
    for (std::size_t i = m; i-- > 0;) {
        double u = dot(dL_dcolor, frags[i].color) + dL_dopacity;
        g[i].d_color = dL_dcolor * wvals[i];
        g[i].d_alpha = u * tvals[i] - suffix / (1.0 - frags[i].alpha);
        suffix += u * wvals[i];
    }
    return g;
}

RenderOutput composite_from_cache(const ForwardCache& cache, const LayerSet& layers,
                                  const RenderOptions& opts) {
    RenderOutput out;
    out.color = Image(cache.width, cache.height, 3);
    out.opacity = Image(cache.width, cache.height, 1);
    out.transmittance = Image(cache.width, cache.height, 1);
    out.frag_count = Image(cache.width, cache.height, 1);
    parallel_for(static_cast<std::size_t>(cache.height), opts.threads, [&](std::size_t y) {
        std::vector<FragAC> frags;
        for (int x = 0; x < cache.width; ++x) {
            std::size_t pix = y * cache.width + x;
            int lo = cache.offsets[pix], hi = cache.offsets[pix + 1];
            frags.clear();
            for (int i = lo; i < hi; ++i) frags.push_back(interp_fragment(cache.frags[i], layers));
            CompositeResult cr = composite(frags, opts);
            int xi = static_cast<int>(x), yi = static_cast<int>(y);
            for (int c = 0; c < 3; ++c) out.color.at(xi, yi, c) = cr.color[c];
            out.opacity.at(xi, yi, 0) = cr.opacity;
            out.transmittance.at(xi, yi, 0) = cr.transmittance;
            out.frag_count.at(xi, yi, 0) = static_cast<double>(hi - lo);
        }
    });
    return out;
}

RenderOutput render(const LayerSet& layers, const Camera& cam, const RenderOptions& opts,
                    ForwardCache* cache_out) {
    require_valid(cam);
    ProjectedLayers pl = project_layers(layers, cam);
    TileBins bins = bin_impl(pl, layers, cam, opts.tile_size);
    std::vector<TileRaster> tiles(bins.tris.size());
    parallel_for(bins.tris.size(), opts.threads, [&](std::size_t ti) {
        raster_tile(ti, bins, pl, layers, cam, opts, tiles[ti]);
    });
    ForwardCache cache = assemble_cache(tiles, cam, opts.tile_size, bins.tiles_x);
    RenderOutput out = composite_from_cache(cache, layers, opts);
    out.near_culled = bins.near_culled;
    if (cache_out) *cache_out = std::move(cache);
    return out;
}

GradientBuffer render_backward(const ForwardCache& cache, const LayerSet& layers,
                               const AlphaParams& params, const RenderOptions& opts,
                               const Image& dL_dcolor, const Image* dL_dopacity) {
    if (dL_dcolor.width != cache.width || dL_dcolor.height != cache.height ||
        dL_dcolor.channels != 3)
        throw std::runtime_error("render backward: color gradient shape mismatch");
    require_finite_upstream(dL_dcolor, "color");
    if (dL_dopacity) {
        if (dL_dopacity->width != cache.width || dL_dopacity->height != cache.height ||
            dL_dopacity->channels != 1)
            throw std::runtime_error("render backward: opacity gradient shape mismatch");
        require_finite_upstream(*dL_dopacity, "opacity");
    }

    const Mesh& base = *layers.base;
    const int nv = base.num_vertices();
    const int tile = opts.tile_size;
    const int tiles_x = (cache.width + tile - 1) / tile;
    const int tiles_y = (cache.height + tile - 1) / tile;
    const std::size_t ntiles = static_cast<std::size_t>(tiles_x) * tiles_y;

    struct Scratch {
        std::vector<std::vector<double>> d_alpha;
        std::vector<Vec3> d_disp;
    };
    std::vector<Scratch> scratch(ntiles);

    parallel_for(ntiles, opts.threads, [&](std::size_t ti) {
        Scratch& sc = scratch[ti];
        sc.d_alpha.assign(layers.num_layers, std::vector<double>(nv, 0.0));
        sc.d_disp.assign(nv, Vec3{0, 0, 0});
        int tx = static_cast<int>(ti) % tiles_x, ty = static_cast<int>(ti) / tiles_x;
        int x0 = tx * tile, y0 = ty * tile;
        int x1 = std::min(x0 + tile, cache.width), y1 = std::min(y0 + tile, cache.height);
        std::vector<FragAC> frags;
        std::vector<uint8_t> clamped;
        for (int y = y0; y < y1; ++y)
            for (int x = x0; x < x1; ++x) {
                std::size_t pix = static_cast<std::size_t>(y) * cache.width + x;
                int lo = cache.offsets[pix], hi = cache.offsets[pix + 1];
                if (lo == hi) continue;
                frags.clear();
                clamped.assign(hi - lo, 0);
                for (int i = lo; i < hi; ++i) {
                    bool cl = false;
                    frags.push_back(interp_fragment(cache.frags[i], layers, &cl));
                    clamped[i - lo] = cl;
                }
                Vec3 gc{dL_dcolor.at(x, y, 0), dL_dcolor.at(x, y, 1), dL_dcolor.at(x, y, 2)};
                double go = dL_dopacity ? dL_dopacity->at(x, y, 0) : 0.0;
                auto grads = composite_backward(frags, opts, gc, go);
                for (int i = lo; i < hi; ++i) {
                    const CachedFragment& fr = cache.frags[i];
                    const FragGrad& g = grads[i - lo];
                    const auto& t = base.faces[fr.face];
                    for (int k = 0; k < 3; ++k) {
                        if (!clamped[i - lo])
                            sc.d_alpha[fr.layer][t[k]] += fr.w[k] * g.d_alpha;
                        sc.d_disp[t[k]] += fr.w[k] * g.d_color;
                    }
                }
            }
    });

    GradientBuffer gb;
    gb.d_alpha.assign(layers.num_layers, std::vector<double>(nv, 0.0));
    std::vector<Vec3> d_disp(nv, Vec3{0, 0, 0});
    for (std::size_t ti = 0; ti < ntiles; ++ti) {  // fixed order: thread-count independent
        for (int l = 0; l < layers.num_layers; ++l)
            for (int v = 0; v < nv; ++v) gb.d_alpha[l][v] += scratch[ti].d_alpha[l][v];
        for (int v = 0; v < nv; ++v) d_disp[v] += scratch[ti].d_disp[v];
    }

    gb.d_positions.assign(nv, Vec3{0, 0, 0});
    gb.d_colors.assign(nv, Vec3{0, 0, 0});
    for (int l = 0; l < layers.num_layers; ++l)
        for (int v = 0; v < nv; ++v) {
            double da = gb.d_alpha[l][v];
            if (da == 0.0) continue;
            AlphaGrad ag = sdf_to_alpha_backward(layers.signed_dists[l][v], params, da);
            gb.d_b += ag.d_b;
            gb.d_positions[v] += ag.d_s * -layers.normals[v];
        }
    for (int v = 0; v < nv; ++v) {
        const Vec3& c = layers.display_colors[v];
        gb.d_colors[v] = Vec3{d_disp[v].x * c.x * (1.0 - c.x), d_disp[v].y * c.y * (1.0 - c.y),
                              d_disp[v].z * c.z * (1.0 - c.z)};
    }
    return gb;
}

RenderOutput oracle_render(const LayerSet& layers, const Camera& cam,
                           const RenderOptions& opts) {
    require_valid(cam);
    ProjectedLayers pl = project_layers(layers, cam);
    RenderOutput out;
    out.color = Image(cam.width, cam.height, 3);
    out.opacity = Image(cam.width, cam.height, 1);
    out.transmittance = Image(cam.width, cam.height, 1);
    out.frag_count = Image(cam.width, cam.height, 1);
    out.near_culled = pl.near_culled;
    const Mesh& base = *layers.base;
    parallel_for(static_cast<std::size_t>(cam.height), opts.threads, [&](std::size_t yy) {
        int y = static_cast<int>(yy);
        std::vector<CachedFragment> list;
        std::vector<FragAC> frags;
        for (int x = 0; x < cam.width; ++x) {
            Ray ray = pixel_ray(cam, x, y);
            list.clear();
            for (int l = 0; l < layers.num_layers; ++l)
                for (int f = 0; f < base.num_faces(); ++f) {
                    if (pl.culled[l][f]) continue;
                    const auto& t = base.faces[f];
                    auto hit = ray_triangle_intersect(ray.origin, ray.direction,
                                                      layers.layer_vertices[l][t[0]],
                                                      layers.layer_vertices[l][t[1]],
                                                      layers.layer_vertices[l][t[2]]);
                    if (!hit) continue;
                    double z = hit->bary.x * pl.proj[l][t[0]].z + hit->bary.y * pl.proj[l][t[1]].z +
                               hit->bary.z * pl.proj[l][t[2]].z;
                    if (z <= cam.near || z >= cam.far) continue;
                    list.push_back({l, f, z, {hit->bary.x, hit->bary.y, hit->bary.z}});
                }
            std::sort(list.begin(), list.end(), frag_less);
            if (static_cast<int>(list.size()) > opts.frag_cap) list.resize(opts.frag_cap);
            frags.clear();
            for (const auto& fr : list) frags.push_back(interp_fragment(fr, layers));
            CompositeResult cr = composite(frags, opts);
            for (int c = 0; c < 3; ++c) out.color.at(x, y, c) = cr.color[c];
            out.opacity.at(x, y, 0) = cr.opacity;
            out.transmittance.at(x, y, 0) = cr.transmittance;
            out.frag_count.at(x, y, 0) = static_cast<double>(list.size());
        }
    });
    return out;
}

bool same_fragment_sets(const ForwardCache& a, const ForwardCache& b) {
    if (a.width != b.width || a.height != b.height) return false;
    if (a.offsets != b.offsets) return false;
    for (std::size_t i = 0; i < a.frags.size(); ++i)
        if (a.frags[i].layer != b.frags[i].layer || a.frags[i].face != b.frags[i].face)
            return false;
    return true;
}

}  // namespace softmesh

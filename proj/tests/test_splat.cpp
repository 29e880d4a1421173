#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "helpers.hpp"
#include "softmesh/intersect.hpp"
#include "softmesh/rng.hpp"
#include "softmesh/shapes.hpp"
#include "softmesh/splat.hpp"

using namespace softmesh;
using testutil::contains;
using testutil::rel_err;

namespace {

Camera axis_camera() {
    // identity pose at the origin looking down +z; 32x32, 2x2 tiles of 16 px
    Camera cam;
    cam.fx = cam.fy = 16.0;
    cam.cx = cam.cy = 16.0;
    cam.width = cam.height = 32;
    cam.near = 0.1;
    cam.far = 100.0;
    return cam;
}

// world position whose projection lands at pixel coords (u, v) at depth z
Vec3 at_pixel(const Camera& cam, double u, double v, double z) {
    return {(u - cam.cx) / cam.fx * z, (v - cam.cy) / cam.fy * z, z};
}

RenderOptions sequential() {
    RenderOptions o;
    o.threads = 1;
    return o;
}

LayerSet flat_layers(const Mesh& base, double beta) {
    LayerSet ls = make_layer_set(base, {0.0});
    compute_alphas(ls, alpha_params_for_beta(beta));
    return ls;
}

struct SphereScene {
    Mesh base;
    LayerSet layers;
    AlphaParams params;
    Camera cam;

    SphereScene(int res = 32, int nlayers = 5, double beta = 0.6, uint64_t seed = 17) {
        base = make_icosphere({0, 0, 0}, 0.8, 2);
        base.colors.resize(base.vertices.size());
        Rng rng(seed);
        for (auto& c : base.colors)
            c = Vec3{rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)};
        Rng offs = rng.fork(3);
        layers = sample_layers(base, nlayers, 0.08, offs);
        params = alpha_params_for_beta(beta);
        compute_alphas(layers, params);
        cam = make_look_at({1.9, 0.4, 0.7}, {0, 0, 0}, {0, 0, 1}, res, res, res, res, 0.08,
                           10.0);
    }
};

double image_sum(const Image& img) {
    double s = 0;
    for (double v : img.data) s += v;
    return s;
}

}  // namespace

TEST_CASE("composite: over blending on two half-transparent fragments") {
    std::vector<FragAC> frags = {{0.5, {1, 0, 0}}, {0.5, {0, 1, 0}}};
    CompositeResult r = composite(frags, sequential());
    CHECK(r.color.x == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(r.color.y == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(r.color.z == 0.0);
    CHECK(r.opacity == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(r.transmittance == doctest::Approx(0.25).epsilon(1e-15));
    REQUIRE(r.weights.size() == 2);
    CHECK(r.weights[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(r.weights[1] == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("composite: single nearly-opaque fragment") {
    std::vector<FragAC> frags = {{0.999, {1, 0, 0}}};
    CompositeResult r = composite(frags, sequential());
    CHECK(r.color.x == doctest::Approx(0.999).epsilon(1e-15));
    CHECK(r.opacity == doctest::Approx(0.999).epsilon(1e-15));
    CHECK(r.transmittance == doctest::Approx(0.001).epsilon(1e-12));
}

TEST_CASE("composite: weights are nonnegative and telescope to one") {
    Rng rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        int n = 1 + static_cast<int>(rng.uniform_index(20));
        std::vector<FragAC> frags(n);
        for (auto& f : frags) {
            f.alpha = rng.uniform() < 0.1 ? kAlphaMax : rng.uniform() * kAlphaMax;
            f.color = Vec3{rng.uniform(), rng.uniform(), rng.uniform()};
        }
        RenderOptions opts = sequential();
        opts.gradient_check_mode = trial % 2 == 0;  // both with and without early term
        CompositeResult r = composite(frags, opts);
        double wsum = 0;
        for (double w : r.weights) {
            CHECK(w >= 0.0);
            wsum += w;
        }
        CHECK(std::abs(wsum - r.opacity) < 1e-12);
        CHECK(std::abs(r.opacity + r.transmittance - 1.0) < 1e-12);
    }
}

TEST_CASE("composite_backward: hand-worked two-fragment case") {
    std::vector<FragAC> frags = {{0.5, {1, 0, 0}}, {0.5, {0, 1, 0}}};
    auto g = composite_backward(frags, sequential(), {1, 0, 0}, 0.0);
    REQUIRE(g.size() == 2);
    // L = red channel = a1 + (1-a1)*a2*0
    CHECK(g[0].d_alpha == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(g[1].d_alpha == doctest::Approx(0.0));
    CHECK(norm(g[0].d_color - Vec3{0.5, 0, 0}) < 1e-15);
    CHECK(norm(g[1].d_color - Vec3{0.25, 0, 0}) < 1e-15);
}

TEST_CASE("composite_backward matches finite differences") {
    Rng rng(32);
    RenderOptions opts = sequential();
    opts.gradient_check_mode = true;
    for (int trial = 0; trial < 40; ++trial) {
        int n = 1 + static_cast<int>(rng.uniform_index(8));
        std::vector<FragAC> frags(n);
        for (auto& f : frags) {
            f.alpha = rng.uniform() * 0.95;
            f.color = Vec3{rng.uniform(), rng.uniform(), rng.uniform()};
        }
        Vec3 gc{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        double go = rng.uniform(-1, 1);
        auto loss = [&](const std::vector<FragAC>& fl) {
            CompositeResult r = composite(fl, opts);
            return dot(gc, r.color) + go * r.opacity;
        };
        auto g = composite_backward(frags, opts, gc, go);
        // the loss is affine in each single alpha or color channel, so the
        // central difference is exact for any step; a large step beats roundoff
        const double h = 1e-3;
        for (int i = 0; i < n; ++i) {
            auto fp = frags, fm = frags;
            fp[i].alpha += h;
            fm[i].alpha -= h;
            double fd = (loss(fp) - loss(fm)) / (2 * h);
            CHECK(rel_err(g[i].d_alpha, fd, 1e-6) < 1e-5);
            for (int c = 0; c < 3; ++c) {
                fp = frags;
                fm = frags;
                fp[i].color[c] += h;
                fm[i].color[c] -= h;
                fd = (loss(fp) - loss(fm)) / (2 * h);
                CHECK(rel_err(g[i].d_color[c], fd, 1e-6) < 1e-5);
            }
        }
    }
}

TEST_CASE("composite_backward: fragments past early termination get zero gradient") {
    std::vector<FragAC> frags(8, FragAC{0.999, {0.3, 0.3, 0.3}});
    RenderOptions opts = sequential();  // early term at T < 1e-4
    auto g = composite_backward(frags, opts, {1, 1, 1}, 0.0);
    // T after k fragments is 1e-3k; cutoff hits at k = 2 (T = 1e-6 < 1e-4)
    CHECK(g[0].d_alpha != 0.0);
    CHECK(g[7].d_alpha == 0.0);
    CHECK(norm(g[7].d_color) == 0.0);
    CompositeResult r = composite(frags, opts);
    CHECK(r.weights[7] == 0.0);
}

TEST_CASE("tile binning covers exactly the AABB-overlapped tiles") {
    Camera cam = axis_camera();
    Mesh tri;
    tri.vertices = {at_pixel(cam, 1, 1, 1.0), at_pixel(cam, 7, 1, 1.0), at_pixel(cam, 4, 7, 1.0)};
    tri.faces = {{0, 1, 2}};
    LayerSet ls = flat_layers(tri, 1.0);
    TileBins bins = bin_triangles(ls, cam, sequential());
    REQUIRE(bins.tiles_x == 2);
    REQUIRE(bins.tiles_y == 2);
    CHECK(bins.tris[0].size() == 1);  // AABB inside [0,8]^2 -> tile (0,0) only
    CHECK(bins.tris[1].empty());
    CHECK(bins.tris[2].empty());
    CHECK(bins.tris[3].empty());

    Mesh wide;
    wide.vertices = {at_pixel(cam, 10, 2, 1.0), at_pixel(cam, 20, 2, 1.0),
                     at_pixel(cam, 15, 6, 1.0)};
    wide.faces = {{0, 1, 2}};
    LayerSet ls2 = flat_layers(wide, 1.0);
    TileBins bins2 = bin_triangles(ls2, cam, sequential());
    CHECK(bins2.tris[0].size() == 1);  // x spans tiles 0 and 1 on the top row
    CHECK(bins2.tris[1].size() == 1);
    CHECK(bins2.tris[2].empty());
    CHECK(bins2.tris[3].empty());
}

TEST_CASE("near-plane crossers are culled and counted; fully-behind ones are not counted") {
    Camera cam = axis_camera();
    Mesh tri;
    tri.vertices = {at_pixel(cam, 8, 8, 1.0), at_pixel(cam, 24, 8, 1.0),
                    {0.0, 0.01, 0.05}};  // third vertex behind near = 0.1
    tri.faces = {{0, 1, 2}};
    LayerSet ls = flat_layers(tri, 1.0);
    TileBins bins = bin_triangles(ls, cam, sequential());
    CHECK(bins.near_culled == 1);
    for (const auto& t : bins.tris) CHECK(t.empty());
    RenderOutput out = render(ls, cam, sequential());
    CHECK(out.near_culled == 1);
    CHECK(image_sum(out.frag_count) == 0.0);

    Mesh behind;
    behind.vertices = {{0, 0, 0.05}, {0.01, 0, 0.05}, {0, 0.01, 0.05}};
    behind.faces = {{0, 1, 2}};
    LayerSet ls2 = flat_layers(behind, 1.0);
    TileBins bins2 = bin_triangles(ls2, cam, sequential());
    CHECK(bins2.near_culled == 0);
    for (const auto& t : bins2.tris) CHECK(t.empty());
}

TEST_CASE("perspective-corrected barycentrics: hand-worked edge midpoint") {
    Camera cam = axis_camera();
    Mesh tri;
    // pixel (16,16) center (16.5,16.5) sits mid-edge between A (z=1) and C (z=3)
    tri.vertices = {at_pixel(cam, 12.5, 16.5, 1.0), at_pixel(cam, 16.5, 8.5, 1.0),
                    at_pixel(cam, 20.5, 16.5, 3.0)};
    tri.faces = {{0, 1, 2}};
    LayerSet ls = flat_layers(tri, 1.0);
    ForwardCache cache;
    render(ls, cam, sequential(), &cache);
    std::size_t pix = 16 * 32 + 16;
    REQUIRE(cache.offsets[pix + 1] - cache.offsets[pix] == 1);
    const CachedFragment& fr = cache.frags[cache.offsets[pix]];
    // screen weights (0.5, 0, 0.5) at depths (1, 1, 3): 1/z = 2/3, z = 1.5,
    // perspective-corrected weights (0.75, 0, 0.25)
    CHECK(fr.z == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(fr.w[0] == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(std::abs(fr.w[1]) < 1e-14);
    CHECK(fr.w[2] == doctest::Approx(0.25).epsilon(1e-14));

    // the same weights fall out of exact ray-triangle intersection
    Ray ray = pixel_ray(cam, 16, 16);
    auto hit = ray_triangle_intersect(ray.origin, ray.direction, tri.vertices[0],
                                      tri.vertices[1], tri.vertices[2]);
    REQUIRE(hit.has_value());
    CHECK(std::abs(hit->bary.x - fr.w[0]) < 1e-12);
    CHECK(std::abs(hit->bary.y - fr.w[1]) < 1e-12);
    CHECK(std::abs(hit->bary.z - fr.w[2]) < 1e-12);
}

TEST_CASE("fragment ordering is (z, layer, face) and the cap keeps the nearest") {
    Camera cam = axis_camera();
    Mesh stack;
    // three triangles covering the image center at depths 1, 2, 3 (faces 0..2),
    // plus a duplicate of the nearest to exercise the face tiebreak
    auto tri_at = [&](double z, int du) {
        stack.vertices.push_back(at_pixel(cam, 4.0 + du, 4, z));
        stack.vertices.push_back(at_pixel(cam, 28.0 + du, 4, z));
        stack.vertices.push_back(at_pixel(cam, 16.0 + du, 28, z));
    };
    tri_at(2.0, 0);
    tri_at(1.0, 0);
    tri_at(3.0, 0);
    tri_at(1.0, 0);  // exact duplicate of face 1 at z=1
    stack.faces = {{0, 1, 2}, {3, 4, 5}, {6, 7, 8}, {9, 10, 11}};
    LayerSet ls = flat_layers(stack, 1.0);

    ForwardCache cache;
    RenderOptions opts = sequential();
    render(ls, cam, opts, &cache);
    std::size_t pix = 16 * 32 + 16;
    REQUIRE(cache.offsets[pix + 1] - cache.offsets[pix] == 4);
    const CachedFragment* fr = &cache.frags[cache.offsets[pix]];
    CHECK(fr[0].z == doctest::Approx(1.0));
    CHECK(fr[0].face == 1);  // z ties broken by face id
    CHECK(fr[1].face == 3);
    CHECK(fr[2].z == doctest::Approx(2.0));
    CHECK(fr[3].z == doctest::Approx(3.0));

    opts.frag_cap = 2;
    ForwardCache capped;
    RenderOutput out = render(ls, cam, opts, &capped);
    CHECK(capped.offsets[pix + 1] - capped.offsets[pix] == 2);
    CHECK(out.frag_count.at(16, 16, 0) == 2.0);
    CHECK(capped.frags[capped.offsets[pix]].face == 1);
    CHECK(capped.frags[capped.offsets[pix] + 1].face == 3);
}

TEST_CASE("render equals composite_from_cache bitwise, including after new alphas") {
    SphereScene sc;
    RenderOptions opts = sequential();
    ForwardCache cache;
    RenderOutput a = render(sc.layers, sc.cam, opts, &cache);
    RenderOutput b = composite_from_cache(cache, sc.layers, opts);
    CHECK(testutil::bitwise_equal(a.color.data, b.color.data));
    CHECK(testutil::bitwise_equal(a.opacity.data, b.opacity.data));
    CHECK(testutil::bitwise_equal(a.transmittance.data, b.transmittance.data));

    // update alphas in place; cache recomposite tracks a fresh render exactly
    AlphaParams p2 = alpha_params_for_beta(0.35);
    compute_alphas(sc.layers, p2);
    RenderOutput c = composite_from_cache(cache, sc.layers, opts);
    RenderOutput d = render(sc.layers, sc.cam, opts);
    CHECK(testutil::bitwise_equal(c.color.data, d.color.data));
    CHECK(testutil::bitwise_equal(c.opacity.data, d.opacity.data));
    CHECK(!testutil::bitwise_equal(a.color.data, c.color.data));  // beta mattered
}

TEST_CASE("tiled renderer agrees with the ray-tracing oracle") {
    SphereScene sc(48);
    RenderOptions opts = sequential();
    RenderOutput fast = render(sc.layers, sc.cam, opts);
    RenderOutput slow = oracle_render(sc.layers, sc.cam, opts);
    CHECK(max_abs_diff(fast.frag_count, slow.frag_count) == 0.0);
    CHECK(max_abs_diff(fast.color, slow.color) < 1e-9);
    CHECK(max_abs_diff(fast.opacity, slow.opacity) < 1e-9);
    CHECK(max_abs_diff(fast.transmittance, slow.transmittance) < 1e-9);
    CHECK(fast.near_culled == slow.near_culled);
    CHECK(image_sum(fast.frag_count) > 0.0);
    // something actually rendered: the sphere covers a solid chunk of pixels
    CHECK(image_sum(fast.opacity) > 100.0);
}

TEST_CASE("renders are identical across thread counts") {
    SphereScene sc;
    RenderOptions one = sequential();
    RenderOptions four = sequential();
    four.threads = 4;
    ForwardCache c1, c4;
    RenderOutput a = render(sc.layers, sc.cam, one, &c1);
    RenderOutput b = render(sc.layers, sc.cam, four, &c4);
    CHECK(testutil::bitwise_equal(a.color.data, b.color.data));
    CHECK(same_fragment_sets(c1, c4));

    Image ones(sc.cam.width, sc.cam.height, 3);
    for (auto& v : ones.data) v = 1.0;
    GradientBuffer g1 = render_backward(c1, sc.layers, sc.params, one, ones);
    GradientBuffer g4 = render_backward(c4, sc.layers, sc.params, four, ones);
    CHECK(testutil::bitwise_equal(g1.d_positions, g4.d_positions));
    CHECK(testutil::bitwise_equal(g1.d_colors, g4.d_colors));
    CHECK(g1.d_b == g4.d_b);
}

TEST_CASE("render_backward matches finite differences under frozen fragments") {
    SphereScene sc(24, 3, 0.7, 19);
    RenderOptions opts = sequential();
    opts.gradient_check_mode = true;
    ForwardCache cache;
    render(sc.layers, sc.cam, opts, &cache);

    Image gc(sc.cam.width, sc.cam.height, 3);
    Image go(sc.cam.width, sc.cam.height, 1);
    Rng rng(5);
    for (auto& v : gc.data) v = rng.uniform(-1, 1);
    for (auto& v : go.data) v = rng.uniform(-1, 1);
    auto loss_now = [&](const LayerSet& ls) {
        RenderOutput out = composite_from_cache(cache, ls, opts);
        double L = 0;
        for (int y = 0; y < out.color.height; ++y)
            for (int x = 0; x < out.color.width; ++x) {
                for (int c = 0; c < 3; ++c) L += gc.at(x, y, c) * out.color.at(x, y, c);
                L += go.at(x, y, 0) * out.opacity.at(x, y, 0);
            }
        return L;
    };
    GradientBuffer g = render_backward(cache, sc.layers, sc.params, opts, gc, &go);

    const double h = 1e-6;

    // sharpness parameter
    {
        AlphaParams pp{sc.params.b + h}, pm{sc.params.b - h};
        LayerSet lp = sc.layers, lm = sc.layers;
        compute_alphas(lp, pp);
        compute_alphas(lm, pm);
        double fd = (loss_now(lp) - loss_now(lm)) / (2 * h);
        CHECK(rel_err(g.d_b, fd, 1e-6) < 1e-4);
    }

    // raw colors: probe the strongest entries
    std::vector<int> order(sc.base.num_vertices());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return norm(g.d_colors[a]) > norm(g.d_colors[b]); });
    for (int k = 0; k < 5; ++k) {
        int i = order[k];
        for (int ch = 0; ch < 3; ++ch) {
            Mesh mp = sc.base, mm = sc.base;
            mp.colors[i][ch] += h;
            mm.colors[i][ch] -= h;
            LayerSet lp = sc.layers, lm = sc.layers;
            refresh_display_colors(lp, mp.colors);
            refresh_display_colors(lm, mm.colors);
            double fd = (loss_now(lp) - loss_now(lm)) / (2 * h);
            CHECK(rel_err(g.d_colors[i][ch], fd, 1e-6) < 1e-4);
        }
    }

    // positions through the stop-gradient distances
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return norm(g.d_positions[a]) > norm(g.d_positions[b]); });
    for (int k = 0; k < 5; ++k) {
        int i = order[k];
        for (int ax = 0; ax < 3; ++ax) {
            std::vector<Vec3> vp = sc.base.vertices, vm = sc.base.vertices;
            vp[i][ax] += h;
            vm[i][ax] -= h;
            LayerSet lp = sc.layers, lm = sc.layers;
            refresh_signed_dists(lp, vp);
            refresh_signed_dists(lm, vm);
            compute_alphas(lp, sc.params);
            compute_alphas(lm, sc.params);
            double fd = (loss_now(lp) - loss_now(lm)) / (2 * h);
            CHECK(rel_err(g.d_positions[i][ax], fd, 1e-6) < 1e-4);
        }
    }
}

TEST_CASE("render_backward rejects non-finite upstream gradients") {
    SphereScene sc(16, 2);
    RenderOptions opts = sequential();
    ForwardCache cache;
    render(sc.layers, sc.cam, opts, &cache);
    Image gc(16, 16, 3);
    gc.at(3, 7, 1) = std::numeric_limits<double>::quiet_NaN();
    try {
        render_backward(cache, sc.layers, sc.params, opts, gc);
        FAIL("expected throw");
    } catch (const std::runtime_error& e) {
        CHECK(contains(e.what(), "(3, 7)"));
        CHECK(contains(e.what(), "color"));
    }
    Image bad_shape(8, 8, 3);
    CHECK_THROWS_AS(render_backward(cache, sc.layers, sc.params, opts, bad_shape),
                    std::runtime_error);
}

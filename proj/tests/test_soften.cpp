#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "softmesh/constants.hpp"
#include "softmesh/rng.hpp"
#include "softmesh/shapes.hpp"
#include "softmesh/soften.hpp"

using namespace softmesh;
using testutil::rel_err;

TEST_CASE("beta parameterization round-trips and stays above the floor") {
    for (double beta : {2e-4, 1e-3, 0.05, 0.6, 5.0, 40.0}) {
        AlphaParams p = alpha_params_for_beta(beta);
        CHECK(rel_err(beta_of(p), beta) < 1e-9);
    }
    CHECK(beta_of(AlphaParams{-100.0}) >= kBetaMin);
    CHECK(beta_of(AlphaParams{-100.0}) < kBetaMin * 1.001);
    CHECK_THROWS_AS(alpha_params_for_beta(kBetaMin), std::runtime_error);
    CHECK_THROWS_AS(alpha_params_for_beta(0.0), std::runtime_error);

    // dbeta/db matches finite differences
    for (double b : {-3.0, -0.5, 0.0, 1.0, 4.0}) {
        double h = 1e-6;
        double fd = (beta_of(AlphaParams{b + h}) - beta_of(AlphaParams{b - h})) / (2 * h);
        CHECK(rel_err(dbeta_db(AlphaParams{b}), fd, 1e-10) < 1e-7);
    }
}

TEST_CASE("offsets are stratified, clamped away from zero, and deterministic") {
    const double delta = 0.08;
    Rng rng(7);
    for (int n : {1, 2, 5, 9}) {
        Rng r1 = rng.fork(n), r2 = rng.fork(n);
        auto off = draw_offsets(n, delta, r1);
        auto off2 = draw_offsets(n, delta, r2);
        REQUIRE(static_cast<int>(off.size()) == n);
        CHECK(off == off2);  // same stream, same draws
        for (int j = 0; j < n; ++j) {
            // stratum j covers [-delta + 2*delta*j/n, -delta + 2*delta*(j+1)/n]
            double lo = -delta + 2 * delta * j / n;
            double hi = -delta + 2 * delta * (j + 1) / n;
            CHECK(off[j] >= lo - 1e-12);
            CHECK(off[j] <= hi + 1e-12);
            CHECK(std::abs(off[j]) >= kEpsOffsetFrac * delta * (1 - 1e-9));
        }
    }
}

TEST_CASE("layer construction offsets along detached normals") {
    Mesh base = make_icosphere({0, 0, 0}, 0.8, 2);
    base.colors.assign(base.vertices.size(), Vec3{0.2, -0.4, 1.0});
    std::vector<double> offsets = {-0.05, 0.01, 0.07};
    LayerSet ls = make_layer_set(base, offsets);

    CHECK(ls.base == &base);
    CHECK(ls.num_layers == 3);
    REQUIRE(ls.layer_vertices.size() == 3);
    REQUIRE(ls.signed_dists.size() == 3);

    for (int j = 0; j < 3; ++j) {
        for (int i = 0; i < base.num_vertices(); ++i) {
            Vec3 expect = base.vertices[i] + offsets[j] * ls.normals[i];
            CHECK(norm(ls.layer_vertices[j][i] - expect) < 1e-15);
            CHECK(ls.signed_dists[j][i] == doctest::Approx(offsets[j]).epsilon(1e-12));
        }
    }
    // sphere layers are near-concentric spheres (vertex normals are averaged
    // face normals, not exact radials)
    for (int i = 0; i < base.num_vertices(); ++i)
        CHECK(norm(ls.layer_vertices[2][i]) == doctest::Approx(0.8 + 0.07).epsilon(1e-3));

    for (int i = 0; i < base.num_vertices(); ++i) {
        CHECK(ls.display_colors[i].x == doctest::Approx(1.0 / (1.0 + std::exp(-0.2))));
    }
}

TEST_CASE("refresh_signed_dists reproduces offsets and tracks moved bases") {
    Mesh base = make_icosphere({0, 0, 0}, 0.8, 1);
    std::vector<double> offsets = {-0.06, 0.03};
    LayerSet ls = make_layer_set(base, offsets);

    refresh_signed_dists(ls, base.vertices);
    for (int j = 0; j < 2; ++j)
        for (int i = 0; i < base.num_vertices(); ++i)
            CHECK(ls.signed_dists[j][i] == doctest::Approx(offsets[j]).epsilon(1e-12));

    // move a base vertex inward; distances to the frozen layers grow/shrink
    std::vector<Vec3> moved = base.vertices;
    moved[5] -= 0.01 * ls.normals[5];
    refresh_signed_dists(ls, moved);
    CHECK(ls.signed_dists[1][5] == doctest::Approx(0.04).epsilon(1e-9));
    CHECK(ls.signed_dists[0][5] == doctest::Approx(-0.05).epsilon(1e-9));
    // sign comes from the layer's side, not the distance
    CHECK(ls.signed_dists[0][5] < 0.0);
}

TEST_CASE("signed_distance_backward is minus the detached normal") {
    Mesh base = make_icosphere({0, 0, 0}, 0.8, 1);
    LayerSet ls = make_layer_set(base, {-0.04, 0.02, 0.06});

    std::vector<std::vector<double>> dL_ds(3,
                                           std::vector<double>(base.num_vertices(), 0.0));
    dL_ds[0][3] = 2.0;
    dL_ds[2][3] = -0.5;
    dL_ds[1][7] = 1.25;
    auto grad = signed_distance_backward(ls, dL_ds);
    REQUIRE(grad.size() == base.vertices.size());
    CHECK(norm(grad[3] - (-1.5) * ls.normals[3]) < 1e-15);
    CHECK(norm(grad[7] - (-1.25) * ls.normals[7]) < 1e-15);
    CHECK(norm(grad[0]) == 0.0);

    // cross-check against finite differences of the refreshed distances
    double h = 1e-7;
    for (int axis = 0; axis < 3; ++axis) {
        std::vector<Vec3> vp = base.vertices, vm = base.vertices;
        vp[3][axis] += h;
        vm[3][axis] -= h;
        LayerSet lp = ls, lm = ls;
        refresh_signed_dists(lp, vp);
        refresh_signed_dists(lm, vm);
        double fd = 0.0;
        for (int j = 0; j < 3; ++j)
            for (int i = 0; i < base.num_vertices(); ++i)
                fd += dL_ds[j][i] * (lp.signed_dists[j][i] - lm.signed_dists[j][i]) / (2 * h);
        CHECK(rel_err(grad[3][axis], fd, 1e-6) < 1e-5);
    }
}

TEST_CASE("sdf_to_alpha: continuity, monotonicity, clamp, and unit scale") {
    AlphaParams p = alpha_params_for_beta(1.0);  // beta = 1: alpha(0) = 0.5 exactly
    CHECK(sdf_to_alpha(0.0, p) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(sdf_to_alpha(-50.0, p) == kAlphaMax);          // deep inside clamps
    CHECK(sdf_to_alpha(50.0, p) < 1e-20);                // far outside vanishes
    CHECK(sdf_to_alpha(50.0, p) >= 0.0);

    // strictly decreasing across the surface wherever unclamped
    double prev = std::numeric_limits<double>::infinity();
    for (double s = -8.0; s <= 8.0; s += 1.0 / 64.0) {
        double a = sdf_to_alpha(s, p);
        CHECK(a <= prev);
        CHECK(a >= 0.0);
        CHECK(a <= kAlphaMax);
        if (a < kAlphaMax && prev <= kAlphaMax) CHECK(a < prev);
        prev = a;
    }

    // the two branches meet bitwise at s = 0
    for (double beta : {0.25, 1.0, 3.0}) {
        double inside = (1.0 / beta) * (1.0 - 0.5 * std::exp(0.0 / beta));
        double outside = (0.5 / beta) * std::exp(-0.0 / beta);
        CHECK(inside == outside);
        AlphaParams q = alpha_params_for_beta(beta);
        double left = sdf_to_alpha(-1e-300, q);
        double right = sdf_to_alpha(1e-300, q);
        CHECK(left == right);  // continuous through zero at double precision
    }
}

TEST_CASE("sdf_to_alpha_backward matches finite differences and zeroes when clamped") {
    for (double beta : {0.7, 1.3}) {
        AlphaParams p = alpha_params_for_beta(beta);
        for (double s : {-0.9, -0.3, -0.05, 0.02, 0.4, 1.5}) {
            if (sdf_to_alpha(s, p) >= kAlphaMax) continue;
            AlphaGrad g = sdf_to_alpha_backward(s, p, 1.0);
            double h = 1e-6;
            double fd_s = (sdf_to_alpha(s + h, p) - sdf_to_alpha(s - h, p)) / (2 * h);
            CHECK(rel_err(g.d_s, fd_s, 1e-9) < 1e-5);
            AlphaParams pp{p.b + h}, pm{p.b - h};
            double fd_b = (sdf_to_alpha(s, pp) - sdf_to_alpha(s, pm)) / (2 * h);
            CHECK(rel_err(g.d_b, fd_b, 1e-9) < 1e-5);
            // upstream scaling is linear
            AlphaGrad g2 = sdf_to_alpha_backward(s, p, -2.5);
            CHECK(g2.d_s == doctest::Approx(-2.5 * g.d_s));
        }
    }
    // clamped region: beta small enough that alpha(-delta) saturates
    AlphaParams p = alpha_params_for_beta(0.05);
    REQUIRE(sdf_to_alpha(-0.5, p) == kAlphaMax);
    AlphaGrad g = sdf_to_alpha_backward(-0.5, p, 1.0);
    CHECK(g.d_s == 0.0);
    CHECK(g.d_b == 0.0);
}

TEST_CASE("compute_alphas fills every layer consistently") {
    Mesh base = make_icosphere({0, 0, 0}, 0.8, 1);
    Rng rng(9);
    LayerSet ls = sample_layers(base, 5, 0.08, rng);
    AlphaParams p = alpha_params_for_beta(0.6);
    compute_alphas(ls, p);
    REQUIRE(ls.alphas.size() == 5);
    for (int j = 0; j < 5; ++j)
        for (int i = 0; i < base.num_vertices(); ++i)
            CHECK(ls.alphas[j][i] == sdf_to_alpha(ls.signed_dists[j][i], p));
    // negative offsets (inside) get larger alpha than positive ones
    for (int j = 0; j + 1 < 5; ++j) CHECK(ls.offsets[j] < ls.offsets[j + 1]);
    CHECK(ls.alphas[0][0] > ls.alphas[4][0]);
}

TEST_CASE("sample_layers is deterministic per rng stream") {
    Mesh base = make_icosphere({0, 0, 0}, 0.8, 1);
    Rng a(42), b(42);
    LayerSet l1 = sample_layers(base, 4, 0.08, a);
    LayerSet l2 = sample_layers(base, 4, 0.08, b);
    CHECK(l1.offsets == l2.offsets);
    Rng c(43);
    LayerSet l3 = sample_layers(base, 4, 0.08, c);
    CHECK(l1.offsets != l3.offsets);
}

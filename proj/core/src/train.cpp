#include "softmesh/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "softmesh/adam.hpp"
#include "softmesh/constants.hpp"
#include "softmesh/losses.hpp"
#include "softmesh/obj_io.hpp"
#include "softmesh/rng.hpp"
#include "softmesh/splat.hpp"
#include "softmesh/text_format.hpp"

namespace softmesh {

namespace {

constexpr double kGridMargin = 1.3;    // grid half-width / object radius
constexpr double kInitSphere = 0.92;   // init SDF radius / object radius; silhouette forces act on a
                                       // thin unsaturated ring, so start near the expected mean radius
constexpr uint64_t kStreamOffsets = 1;
constexpr uint64_t kStreamViews = 2;

struct ConfigField {
    const char* key;
    enum Kind { Int, Double, U64 } kind;
    void* ptr;
};

std::vector<ConfigField> fields(TrainConfig& cfg) {
    return {
        {"iters_total", ConfigField::Int, &cfg.iters_total},
        {"iters_dmtet", ConfigField::Int, &cfg.iters_dmtet},
        {"remesh_period", ConfigField::Int, &cfg.remesh_period},
        {"remesh_enabled", ConfigField::Int, &cfg.remesh_enabled},
        {"layers", ConfigField::Int, &cfg.layers},
        {"delta", ConfigField::Double, &cfg.delta},
        {"dmtet_resolution", ConfigField::Int, &cfg.dmtet_resolution},
        {"target_edge", ConfigField::Double, &cfg.target_edge},
        {"lr_positions", ConfigField::Double, &cfg.lr_positions},
        {"lr_colors", ConfigField::Double, &cfg.lr_colors},
        {"lr_sdf", ConfigField::Double, &cfg.lr_sdf},
        {"lr_b", ConfigField::Double, &cfg.lr_b},
        {"weight_img", ConfigField::Double, &cfg.weight_img},
        {"weight_mask", ConfigField::Double, &cfg.weight_mask},
        {"weight_smooth", ConfigField::Double, &cfg.weight_smooth},
        {"beta_init", ConfigField::Double, &cfg.beta_init},
        {"seed", ConfigField::U64, &cfg.seed},
        {"checkpoint_period", ConfigField::Int, &cfg.checkpoint_period},
    };
}

void set_field(TrainConfig& cfg, const std::string& key, const std::string& value) {
    for (const ConfigField& f : fields(cfg)) {
        if (key != f.key) continue;
        std::istringstream ss(value);
        bool ok = false;
        switch (f.kind) {
            case ConfigField::Int: ok = static_cast<bool>(ss >> *static_cast<int*>(f.ptr)); break;
            case ConfigField::Double:
                ok = static_cast<bool>(ss >> *static_cast<double*>(f.ptr));
                break;
            case ConfigField::U64:
                ok = static_cast<bool>(ss >> *static_cast<uint64_t*>(f.ptr));
                break;
        }
        std::string rest;
        if (!ok || (ss >> rest))
            throw std::runtime_error("config: bad value '" + value + "' for key '" + key + "'");
        return;
    }
    throw std::runtime_error("config: unknown key '" + key + "'");
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    std::size_t e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

}  // namespace

void validate(const TrainConfig& cfg) {
    auto bad = [](const std::string& msg) {
        throw std::runtime_error("config: " + msg);
    };
    if (cfg.iters_total < 1) bad("iters_total must be >= 1");
    if (cfg.iters_dmtet < 1 || cfg.iters_dmtet > cfg.iters_total)
        bad("iters_dmtet must be in [1, iters_total]");
    if (cfg.remesh_period < 1) bad("remesh_period must be >= 1");
    if (cfg.layers < 1) bad("layers must be >= 1");
    if (!(cfg.delta > 0)) bad("delta must be > 0");
    if (cfg.dmtet_resolution < 2) bad("dmtet_resolution must be >= 2");
    if (!(cfg.target_edge > 0)) bad("target_edge must be > 0");
    if (!(cfg.lr_positions > 0) || !(cfg.lr_colors > 0) || !(cfg.lr_sdf > 0) ||
        !(cfg.lr_b > 0))
        bad("learning rates must be > 0");
    if (cfg.weight_img < 0 || cfg.weight_mask < 0 || cfg.weight_smooth < 0)
        bad("loss weights must be >= 0");
    if (!(cfg.beta_init > kBetaMin)) bad("beta_init must exceed the beta floor");
    if (cfg.checkpoint_period < 0) bad("checkpoint_period must be >= 0");
}

TrainConfig load_train_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config " + path);
    TrainConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config: " + path + ":" + std::to_string(lineno) +
                                     ": expected key = value");
        set_field(cfg, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
    }
    validate(cfg);
    return cfg;
}

void apply_override(TrainConfig& cfg, const std::string& assignment) {
    std::size_t eq = assignment.find('=');
    if (eq == std::string::npos)
        throw std::runtime_error("config: override '" + assignment + "' is not key=value");
    set_field(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::string config_to_text(const TrainConfig& cfg) {
    std::ostringstream out;
    TrainConfig& mut = const_cast<TrainConfig&>(cfg);
    for (const ConfigField& f : fields(mut)) {
        out << f.key << " = ";
        switch (f.kind) {
            case ConfigField::Int: out << *static_cast<const int*>(f.ptr); break;
            case ConfigField::Double: out << fmt_g9(*static_cast<const double*>(f.ptr)); break;
            case ConfigField::U64: out << *static_cast<const uint64_t*>(f.ptr); break;
        }
        out << "\n";
    }
    return out.str();
}

std::string metrics_csv_header() {
    return "iter,loss_total,loss_img,loss_mask,loss_smooth,verts,beta,seconds";
}

std::string metrics_csv_row(const MetricsRow& r) {
    std::ostringstream ss;
    ss << r.iter << ',' << fmt_g9(r.loss_total) << ',' << fmt_g9(r.loss_img) << ','
       << fmt_g9(r.loss_mask) << ',' << fmt_g9(r.loss_smooth) << ',' << r.verts << ','
       << fmt_g9(r.beta) << ',' << fmt_g9(r.seconds);
    return ss.str();
}

namespace {

void write_checkpoint(const Mesh& mesh, const std::string& out_dir, const char* stem, int iter) {
    if (out_dir.empty()) return;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%05d.obj", stem, iter);
    save_obj(mesh, out_dir + "/" + std::string(buf));
}

}  // namespace

TrainResult train_loop(const Dataset& ds, const TrainConfig& cfg, const std::string& out_dir,
                       int threads) {
    validate(cfg);
    if (ds.views.size() < 2) throw std::runtime_error("train: need at least 2 views");
    if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

    const Rng root(cfg.seed);
    const SceneBounds sb = scene_bounds(ds.gt_mesh);
    const int n_views = static_cast<int>(ds.views.size());

    // stage-1 parameters: grid SDF + grid colors + b
    TetGrid grid = build_grid(cfg.dmtet_resolution,
                              sb.centroid - Vec3{1, 1, 1} * (kGridMargin * sb.radius),
                              sb.centroid + Vec3{1, 1, 1} * (kGridMargin * sb.radius));
    init_sphere_sdf(grid, sb.centroid, kInitSphere * sb.radius);

    AlphaParams params = alpha_params_for_beta(cfg.beta_init);

    AdamVector sdf_opt;
    sdf_opt.reset(grid.sdf.size());
    AdamVec3 grid_color_opt;
    grid_color_opt.reset(grid.colors.size());
    AdamScalar b_opt;

    // stage-2 parameters: base mesh vertices + colors + b
    Mesh base;
    AdamVec3 pos_opt, col_opt;

    RenderOptions opts;
    opts.threads = threads;

    TrainResult result;
    RemeshConfig rcfg;
    rcfg.target_edge = cfg.target_edge;

    std::vector<int> view_order(n_views);
    auto reshuffle = [&](int epoch) {
        Rng r = root.fork(kStreamViews).fork(static_cast<uint64_t>(epoch));
        for (int i = 0; i < n_views; ++i) view_order[i] = i;
        for (int i = n_views - 1; i > 0; --i) {
            int j = static_cast<int>(r.uniform_index(static_cast<uint64_t>(i) + 1));
            std::swap(view_order[i], view_order[j]);
        }
    };

    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    for (int t = 1; t <= cfg.iters_total; ++t) {
        const bool dmtet_stage = t <= cfg.iters_dmtet;
        const int step_in_epoch = (t - 1) % n_views;
        if (step_in_epoch == 0) reshuffle((t - 1) / n_views);
        const View& view = ds.views[view_order[step_in_epoch]];

        Extraction ext;
        Mesh* mesh = nullptr;
        if (dmtet_stage) {
            ext = marching_tets(grid);
            mesh = &ext.mesh;
        } else {
            if (cfg.remesh_enabled && (t - cfg.iters_dmtet - 1) % cfg.remesh_period == 0) {
                RemeshAttachments att;
                att.vec3_arrays = {&pos_opt.moment1(), &pos_opt.moment2(),
                                   &col_opt.moment1(), &col_opt.moment2()};
                att.counter_arrays = {&pos_opt.counters(), &col_opt.counters()};
                RemeshStats rs;
                base = remesh_step(base, rcfg, att, &rs);
                result.remesh_totals.splits += rs.splits;
                result.remesh_totals.collapses += rs.collapses;
                result.remesh_totals.flips += rs.flips;
            }
            mesh = &base;
        }

        Rng offset_rng = root.fork(kStreamOffsets).fork(static_cast<uint64_t>(t));
        LayerSet ls = sample_layers(*mesh, cfg.layers, cfg.delta, offset_rng);
        compute_alphas(ls, params);

        ForwardCache cache;
        RenderOutput pred = render(ls, view.cam, opts, &cache);

        ImageLoss img = photometric_loss(pred.color, view.rgb);
        ImageLoss msk = mask_loss(pred.opacity, view.mask);
        SmoothLoss smooth = laplacian_smooth_loss(*mesh);

        LossBreakdown loss;
        loss.photometric = img.value;
        loss.mask = msk.value;
        loss.smooth = smooth.value;
        loss.total = cfg.weight_img * img.value + cfg.weight_mask * msk.value +
                     cfg.weight_smooth * smooth.value;
        if (!std::isfinite(loss.total)) {
            write_checkpoint(*mesh, out_dir, "diverged", t);
            throw std::runtime_error("train: non-finite loss at iteration " + std::to_string(t));
        }

        for (double& g : img.d_pred.data) g *= cfg.weight_img;
        for (double& g : msk.d_pred.data) g *= cfg.weight_mask;
        GradientBuffer gb = render_backward(cache, ls, params, opts, img.d_pred, &msk.d_pred);
        for (std::size_t v = 0; v < gb.d_positions.size(); ++v)
            gb.d_positions[v] += cfg.weight_smooth * smooth.d_vertices[v];

        AdamConfig acfg;
        if (dmtet_stage) {
            // discipline: vertex positions are derived, never stepped here
            if (pos_opt.size() != 0) throw std::logic_error("train: position state in stage 1");
            std::vector<double> d_sdf = backprop_to_sdf(ext.map, grid, gb.d_positions);
            ColorBackprop cb = backprop_colors(ext.map, grid, gb.d_colors);
            for (std::size_t i = 0; i < d_sdf.size(); ++i) d_sdf[i] += cb.d_sdf[i];
            acfg.lr = cfg.lr_sdf;
            sdf_opt.step(grid.sdf, d_sdf, acfg, "grid sdf");
            acfg.lr = cfg.lr_colors;
            grid_color_opt.step(grid.colors, cb.d_colors, acfg, "grid colors");
        } else {
            if (pos_opt.size() != base.vertices.size())
                throw std::logic_error("train: optimizer state out of sync");
            acfg.lr = cfg.lr_positions;
            pos_opt.step(base.vertices, gb.d_positions, acfg, "vertex positions");
            acfg.lr = cfg.lr_colors;
            col_opt.step(base.colors, gb.d_colors, acfg, "vertex colors");
        }
        acfg.lr = cfg.lr_b;
        b_opt.step(params.b, gb.d_b, acfg, "beta parameter");

        MetricsRow row;
        row.iter = t;
        row.loss_total = loss.total;
        row.loss_img = loss.photometric;
        row.loss_mask = loss.mask;
        row.loss_smooth = loss.smooth;
        row.verts = mesh->num_vertices();
        row.beta = beta_of(params);
        row.seconds = elapsed();
        result.metrics.push_back(row);

        if (cfg.checkpoint_period > 0 && t % cfg.checkpoint_period == 0)
            write_checkpoint(*mesh, out_dir, "checkpoint", t);

        if (t == cfg.iters_dmtet) {
            // freeze the (post-update) extraction as the base mesh
            Extraction frozen = marching_tets(grid);
            base = frozen.mesh;
            pos_opt.reset(base.vertices.size());
            col_opt.reset(base.colors.size());

            // the frozen base must render exactly like the extraction it came from
            Rng check_rng = root.fork(kStreamOffsets).fork(static_cast<uint64_t>(t));
            LayerSet ls_a = sample_layers(frozen.mesh, cfg.layers, cfg.delta, check_rng);
            compute_alphas(ls_a, params);
            RenderOutput a = render(ls_a, view.cam, opts);
            check_rng = root.fork(kStreamOffsets).fork(static_cast<uint64_t>(t));
            LayerSet ls_b = sample_layers(base, cfg.layers, cfg.delta, check_rng);
            compute_alphas(ls_b, params);
            RenderOutput b2 = render(ls_b, view.cam, opts);
            if (max_abs_diff(a.color, b2.color) > 1e-6)
                throw std::logic_error("train: stage transition changed the rendered frame");
        }
    }

    result.mesh = base;
    result.beta = beta_of(params);
    result.seconds = elapsed();

    if (!out_dir.empty()) {
        std::ofstream csv(out_dir + "/metrics.csv");
        if (!csv) throw std::runtime_error("cannot write " + out_dir + "/metrics.csv");
        csv << metrics_csv_header() << "\n";
        for (const MetricsRow& row : result.metrics) csv << metrics_csv_row(row) << "\n";
        save_obj(result.mesh, out_dir + "/final.obj");
    }
    return result;
}

}  // namespace softmesh

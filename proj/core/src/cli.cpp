#include "softmesh/cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "CLI11.hpp"
#include "softmesh/ablation.hpp"
#include "softmesh/chamfer.hpp"
#include "softmesh/dataset.hpp"
#include "softmesh/obj_io.hpp"
#include "softmesh/splat.hpp"
#include "softmesh/text_format.hpp"
#include "softmesh/train.hpp"

namespace softmesh {

namespace {

void write_snapshot(const TrainConfig& cfg, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::ofstream out(out_dir + "/resolved_config.txt");
    if (!out) throw std::runtime_error("cannot write " + out_dir + "/resolved_config.txt");
    out << config_to_text(cfg);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

void print_report(const std::vector<std::string>& inputs, std::ostream& os) {
    std::vector<std::string> files;
    for (const std::string& path : inputs) {
        if (std::filesystem::is_directory(path)) {
            std::vector<std::string> found;
            for (const auto& entry : std::filesystem::directory_iterator(path)) {
                std::string name = entry.path().filename().string();
                if (name.rfind("ablation_", 0) == 0 && entry.path().extension() == ".csv")
                    found.push_back(entry.path().string());
            }
            std::sort(found.begin(), found.end());
            files.insert(files.end(), found.begin(), found.end());
        } else {
            files.push_back(path);
        }
    }
    if (files.empty()) throw std::runtime_error("report: no ablation CSV files found");

    struct Row {
        std::string suite, config, mem, seconds, verts, cd;
    };
    std::vector<Row> rows;
    for (const std::string& file : files) {
        std::ifstream in(file);
        if (!in) throw std::runtime_error("cannot read " + file);
        std::string line;
        if (!std::getline(in, line) || split_csv(line) != split_csv(ablation_csv_header()))
            throw std::runtime_error("report: " + file + " is not an ablation CSV");
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto f = split_csv(line);
            if (f.size() != 6)
                throw std::runtime_error("report: malformed row in " + file + ": " + line);
            rows.push_back({f[0], f[1], f[5], f[4], f[3], f[2]});
        }
    }

    // Memory / Training / Vertices / CD column order
    std::vector<std::array<std::string, 6>> table;
    table.push_back({"suite", "config", "mem_mb", "train_s", "verts", "cd"});
    for (const Row& r : rows) table.push_back({r.suite, r.config, r.mem, r.seconds, r.verts, r.cd});
    std::array<std::size_t, 6> width{};
    for (const auto& row : table)
        for (int c = 0; c < 6; ++c) width[c] = std::max(width[c], row[c].size());
    for (const auto& row : table) {
        for (int c = 0; c < 6; ++c) {
            os << row[c];
            if (c < 5) os << std::string(width[c] - row[c].size() + 2, ' ');
        }
        os << "\n";
    }
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"soft mesh splatting: synthetic datasets, reconstruction, evaluation"};
    app.require_subcommand(1);

    // make-dataset
    std::string md_shape, md_out;
    int md_views = 24, md_res = 128, md_threads = 0;
    uint64_t md_seed = 1;
    CLI::App* md = app.add_subcommand("make-dataset", "Generate a synthetic multi-view scene");
    md->add_option("--shape", md_shape, "sphere|torus|cube|blob")
        ->required()
        ->check(CLI::IsMember({"sphere", "torus", "cube", "blob"}));
    md->add_option("--views", md_views, "number of cameras")->check(CLI::Range(2, 1000));
    md->add_option("--res", md_res, "image resolution")->check(CLI::Range(8, 4096));
    md->add_option("--seed", md_seed, "scene seed");
    md->add_option("--threads", md_threads, "worker threads (0 = auto)");
    md->add_option("-o,--out", md_out, "output scene directory")->required();

    // reconstruct
    std::string rc_config, rc_scene, rc_out;
    std::vector<std::string> rc_sets;
    int rc_threads = 0;
    uint64_t rc_seed = 0;
    CLI::App* rc = app.add_subcommand("reconstruct", "Optimize a mesh against a scene");
    rc->add_option("-c,--config", rc_config, "config file (key = value lines)")
        ->check(CLI::ExistingFile);
    rc->add_option("--scene", rc_scene, "dataset directory")->required();
    rc->add_option("--set", rc_sets, "override, e.g. --set iters_total=100")->take_all();
    CLI::Option* rc_seed_opt = rc->add_option("--seed", rc_seed, "override config seed");
    rc->add_option("--threads", rc_threads, "worker threads (0 = auto)");
    rc->add_option("-o,--out", rc_out, "output directory")->required();

    // render
    std::string rd_mesh, rd_cams, rd_out;
    int rd_view = 0, rd_layers = 5, rd_threads = 0;
    double rd_delta = 0.045, rd_beta = 0.6;
    uint64_t rd_seed = 1;
    bool rd_oracle = false, rd_f32 = false, rd_timing = false;
    CLI::App* rd = app.add_subcommand("render", "Render a mesh with softened layers");
    rd->add_option("--mesh", rd_mesh, "OBJ mesh")->required()->check(CLI::ExistingFile);
    rd->add_option("--cameras", rd_cams, "cameras.txt")->required()->check(CLI::ExistingFile);
    rd->add_option("--view", rd_view, "camera index");
    rd->add_option("--layers", rd_layers, "softening layers")->check(CLI::Range(1, 64));
    rd->add_option("--delta", rd_delta, "offset half-range");
    rd->add_option("--beta", rd_beta, "alpha sharpness beta");
    rd->add_option("--seed", rd_seed, "offset draw seed");
    rd->add_option("--threads", rd_threads, "worker threads (0 = auto)");
    rd->add_flag("--oracle", rd_oracle, "use the per-pixel ray-cast reference path");
    rd->add_flag("--f32", rd_f32, "also write a raw float32 sidecar");
    rd->add_flag("--timing", rd_timing, "print render wall time");
    rd->add_option("-o,--out", rd_out, "output PPM path")->required();

    // eval
    std::string ev_pred, ev_gt;
    int ev_samples = 100000;
    uint64_t ev_seed = 1234;
    CLI::App* ev = app.add_subcommand("eval", "Chamfer distance between two meshes");
    ev->add_option("--pred", ev_pred, "predicted OBJ")->required()->check(CLI::ExistingFile);
    ev->add_option("--gt", ev_gt, "ground-truth OBJ")->required()->check(CLI::ExistingFile);
    ev->add_option("--samples", ev_samples, "surface samples per mesh")
        ->check(CLI::Range(1, 10000000));
    ev->add_option("--seed", ev_seed, "sampling seed");

    // ablate
    std::string ab_suite, ab_config, ab_scene, ab_out;
    std::vector<std::string> ab_sets;
    int ab_threads = 0;
    uint64_t ab_seed = 0;
    CLI::App* ab = app.add_subcommand("ablate", "Sweep one knob, one training run per value");
    ab->add_option("--suite", ab_suite, "layers|dmtet_res|edge_len")
        ->required()
        ->check(CLI::IsMember({"layers", "dmtet_res", "edge_len"}));
    ab->add_option("-c,--config", ab_config, "base config file")->check(CLI::ExistingFile);
    ab->add_option("--scene", ab_scene, "dataset directory")->required();
    ab->add_option("--set", ab_sets, "base config override")->take_all();
    CLI::Option* ab_seed_opt = ab->add_option("--seed", ab_seed, "override config seed");
    ab->add_option("--threads", ab_threads, "worker threads (0 = auto)");
    ab->add_option("-o,--out", ab_out, "output directory")->required();

    // report
    std::vector<std::string> rp_in;
    std::string rp_out;
    CLI::App* rp = app.add_subcommand("report", "Aggregate ablation CSVs into a summary table");
    rp->add_option("-i,--in", rp_in, "ablation CSV files or directories")->required()->take_all();
    rp->add_option("-o,--out", rp_out, "write table here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    // configuration resolution counts as usage, not runtime
    TrainConfig cfg;
    try {
        if (rc->parsed()) {
            cfg = rc_config.empty() ? TrainConfig{} : load_train_config(rc_config);
            for (const std::string& s : rc_sets) apply_override(cfg, s);
            if (rc_seed_opt->count() > 0) cfg.seed = rc_seed;
            validate(cfg);
        } else if (ab->parsed()) {
            cfg = ab_config.empty() ? TrainConfig{} : load_train_config(ab_config);
            for (const std::string& s : ab_sets) apply_override(cfg, s);
            if (ab_seed_opt->count() > 0) cfg.seed = ab_seed;
            validate(cfg);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (md->parsed()) {
            ShapeKind kind = parse_shape(md_shape);
            Dataset ds = make_dataset(kind, md_views, md_res, md_seed, md_threads);
            save_dataset(ds, kind, md_res, md_out);
            std::cout << "wrote " << ds.views.size() << " views (" << md_res << "x" << md_res
                      << ", " << md_shape << ", seed " << md_seed << ") to " << md_out << "\n";
        } else if (rc->parsed()) {
            write_snapshot(cfg, rc_out);
            Dataset ds = load_dataset(rc_scene);
            TrainResult res = train_loop(ds, cfg, rc_out, rc_threads);
            double cd = eval_chamfer(res.mesh, ds);
            std::cout << "verts=" << res.mesh.num_vertices() << " beta=" << fmt_g9(res.beta)
                      << " seconds=" << fmt_g9(res.seconds) << " chamfer=" << fmt_g9(cd) << "\n";
        } else if (rd->parsed()) {
            Mesh mesh = load_obj(rd_mesh);
            std::vector<Camera> cams = load_cameras(rd_cams);
            if (rd_view < 0 || rd_view >= static_cast<int>(cams.size()))
                throw std::runtime_error("render: view index out of range (have " +
                                         std::to_string(cams.size()) + " cameras)");
            Rng rng(rd_seed);
            LayerSet ls = sample_layers(mesh, rd_layers, rd_delta, rng);
            compute_alphas(ls, alpha_params_for_beta(rd_beta));
            RenderOptions opts;
            opts.threads = rd_threads;
            auto t0 = std::chrono::steady_clock::now();
            RenderOutput out = rd_oracle ? oracle_render(ls, cams[rd_view], opts)
                                         : render(ls, cams[rd_view], opts);
            double ms =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
            save_ppm(out.color, rd_out);
            if (rd_f32) save_f32(out.color, rd_out + ".f32");
            if (rd_timing) std::cout << "render_ms=" << fmt_g9(ms) << "\n";
        } else if (ev->parsed()) {
            Mesh pred = load_obj(ev_pred);
            Mesh gt = load_obj(ev_gt);
            Rng root(ev_seed);
            Rng ra = root.fork(0), rb = root.fork(1);
            std::vector<Vec3> pa = sample_surface(pred, ev_samples, ra);
            std::vector<Vec3> pb = sample_surface(gt, ev_samples, rb);
            std::cout << "chamfer=" << fmt_g9(chamfer(pa, pb)) << "\n";
        } else if (ab->parsed()) {
            write_snapshot(cfg, ab_out);
            Dataset ds = load_dataset(ab_scene);
            std::vector<AblationRow> rows = run_ablation(ab_suite, ds, cfg, ab_out, ab_threads);
            std::cout << ablation_csv_header() << "\n";
            for (const AblationRow& row : rows) std::cout << ablation_csv_row(row) << "\n";
        } else if (rp->parsed()) {
            if (rp_out.empty()) {
                print_report(rp_in, std::cout);
            } else {
                std::ofstream out(rp_out);
                if (!out) throw std::runtime_error("cannot write " + rp_out);
                print_report(rp_in, out);
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace softmesh

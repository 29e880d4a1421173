#include "softmesh/ablation.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "softmesh/chamfer.hpp"
#include "softmesh/text_format.hpp"

namespace softmesh {

namespace {

constexpr uint64_t kEvalSeed = 1234;

// working-set estimate: grid state + optimizer moments, peak mesh with layer
// copies and optimizer moments, dataset images
double estimate_peak_mem_mb(const TrainConfig& cfg, const Dataset& ds, int peak_verts) {
    double n = cfg.dmtet_resolution + 1.0;
    double grid_verts = n * n * n;
    double grid_tets = 6.0 * cfg.dmtet_resolution * cfg.dmtet_resolution * cfg.dmtet_resolution;
    double grid = grid_verts * (24 + 8 + 24 + 16 + 48 + 8) + grid_tets * 16;
    double mesh = static_cast<double>(peak_verts) *
                  (24 + 24 + 96 + 16 + 24 + cfg.layers * (24 + 8 + 8) + 2.0 * 12);
    double images = 0.0;
    for (const View& v : ds.views)
        images += (v.rgb.data.size() + v.mask.data.size()) * 8.0;
    return (grid + mesh + images) / (1024.0 * 1024.0);
}

AblationRow run_one(const std::string& suite, const std::string& label, const Dataset& ds,
                    const TrainConfig& cfg, const std::string& out_dir, int threads) {
    std::string run_dir;
    if (!out_dir.empty()) {
        std::string safe = label;
        std::replace(safe.begin(), safe.end(), '=', '-');
        run_dir = out_dir + "/" + suite + "_" + safe;
    }
    TrainResult res = train_loop(ds, cfg, run_dir, threads);

    AblationRow row;
    row.suite = suite;
    row.label = label;
    row.chamfer_dist = eval_chamfer(res.mesh, ds);
    row.verts = res.mesh.num_vertices();
    row.seconds = res.seconds;
    int peak_verts = 0;
    for (const MetricsRow& m : res.metrics) peak_verts = std::max(peak_verts, m.verts);
    row.peak_mem_mb = estimate_peak_mem_mb(cfg, ds, peak_verts);
    return row;
}

}  // namespace

std::string ablation_csv_header() { return "suite,config,cd,verts,seconds,peak_mem_mb"; }

std::string ablation_csv_row(const AblationRow& row) {
    std::ostringstream ss;
    ss << row.suite << ',' << row.label << ',' << fmt_g9(row.chamfer_dist) << ',' << row.verts
       << ',' << fmt_g9(row.seconds) << ',' << fmt_g9(row.peak_mem_mb);
    return ss.str();
}

double eval_chamfer(const Mesh& mesh, const Dataset& ds, int samples) {
    Rng rng(kEvalSeed);
    std::vector<Vec3> pred = sample_surface(mesh, samples, rng);
    return chamfer(pred, ds.gt_points);
}

std::vector<AblationRow> run_ablation(const std::string& suite, const Dataset& ds,
                                      const TrainConfig& base_cfg, const std::string& out_dir,
                                      int threads) {
    validate(base_cfg);
    std::vector<AblationRow> rows;
    if (suite == "layers") {
        for (int n : {1, 3, 5}) {
            TrainConfig cfg = base_cfg;
            cfg.layers = n;
            rows.push_back(run_one(suite, "layers=" + std::to_string(n), ds, cfg, out_dir,
                                   threads));
        }
    } else if (suite == "dmtet_res") {
        for (int res : {24, 48}) {
            TrainConfig cfg = base_cfg;
            cfg.dmtet_resolution = res;
            rows.push_back(run_one(suite, "res=" + std::to_string(res), ds, cfg, out_dir,
                                   threads));
        }
        TrainConfig cfg = base_cfg;
        cfg.dmtet_resolution = 48;
        cfg.remesh_enabled = 0;
        rows.push_back(run_one(suite, "res=48-no-remesh", ds, cfg, out_dir, threads));
    } else if (suite == "edge_len") {
        for (double scale : {0.5, 1.0, 2.0}) {
            TrainConfig cfg = base_cfg;
            cfg.target_edge = scale * base_cfg.target_edge;
            rows.push_back(run_one(suite, "edge=" + fmt_g9(cfg.target_edge), ds, cfg, out_dir,
                                   threads));
        }
    } else {
        throw std::runtime_error("unknown ablation suite '" + suite +
                                 "' (expected layers|dmtet_res|edge_len)");
    }

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::ofstream csv(out_dir + "/ablation_" + suite + ".csv");
        if (!csv) throw std::runtime_error("cannot write ablation csv in " + out_dir);
        csv << ablation_csv_header() << "\n";
        for (const AblationRow& row : rows) csv << ablation_csv_row(row) << "\n";
    }
    return rows;
}

}  // namespace softmesh

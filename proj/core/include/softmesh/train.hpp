#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "softmesh/dataset.hpp"
#include "softmesh/mesh.hpp"
#include "softmesh/remesh.hpp"
#include "softmesh/tet_grid.hpp"

namespace softmesh {

struct TrainConfig {
    int iters_total = 3000;
    int iters_dmtet = 1500;      // warmup iterations on the tet grid
    int remesh_period = 1;       // stage-2 cadence
    int remesh_enabled = 1;
    int layers = 5;
    double delta = 0.045;        // layer offset half-range, world units
    int dmtet_resolution = 48;
    double target_edge = 0.05;
    double lr_positions = 2e-3;
    double lr_colors = 5e-2;
    double lr_sdf = 5e-3;
    double lr_b = 7e-4;          // slow enough that beta never fully saturates the alpha clamp
    double weight_img = 1.0;
    double weight_mask = 1.0;
    double weight_smooth = 0.01;
    double beta_init = 0.6;      // initial beta, converted to the raw parameter
    uint64_t seed = 1;
    int checkpoint_period = 500;  // OBJ checkpoints; 0 disables
};

void validate(const TrainConfig& cfg);
TrainConfig load_train_config(const std::string& path);
// "key=value" or "key = value"; unknown keys rejected
void apply_override(TrainConfig& cfg, const std::string& assignment);
std::string config_to_text(const TrainConfig& cfg);

struct MetricsRow {
    int iter = 0;
    double loss_total = 0, loss_img = 0, loss_mask = 0, loss_smooth = 0;
    int verts = 0;
    double beta = 0;
    double seconds = 0;  // wall clock since loop start; excluded from
                         // byte-identity comparisons
};
std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsRow& row);

struct TrainResult {
    Mesh mesh;
    double beta = 0.0;
    std::vector<MetricsRow> metrics;
    RemeshStats remesh_totals;
    double seconds = 0.0;
};

// Two-stage loop: tet-grid SDF warmup with per-iteration extraction, then
// direct vertex optimization with periodic remeshing. Writes metrics.csv,
// checkpoints, and final.obj under out_dir (no file IO if out_dir empty).
TrainResult train_loop(const Dataset& ds, const TrainConfig& cfg, const std::string& out_dir,
                       int threads = 0);

}  // namespace softmesh

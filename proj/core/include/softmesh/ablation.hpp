#pragma once

#include <string>
#include <vector>

#include "softmesh/dataset.hpp"
#include "softmesh/train.hpp"

namespace softmesh {

struct AblationRow {
    std::string suite;
    std::string label;
    double chamfer_dist = 0.0;
    int verts = 0;
    double seconds = 0.0;
    double peak_mem_mb = 0.0;  // analytic estimate of working-set size
};

std::string ablation_csv_header();
std::string ablation_csv_row(const AblationRow& row);

// Chamfer between a fresh area-uniform sample of the mesh and the dataset's
// ground-truth points.
double eval_chamfer(const Mesh& mesh, const Dataset& ds, int samples = 10000);

// suite: layers (N 1/3/5), dmtet_res (24/48/48-no-remesh), edge_len
// (0.5x/1x/2x target). Writes ablation_<suite>.csv under out_dir, one
// train_loop run per row.
std::vector<AblationRow> run_ablation(const std::string& suite, const Dataset& ds,
                                      const TrainConfig& base_cfg, const std::string& out_dir,
                                      int threads = 0);

}  // namespace softmesh

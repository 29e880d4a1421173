#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "softmesh/cli.hpp"
#include "softmesh/image.hpp"
#include "softmesh/obj_io.hpp"

using namespace softmesh;
using testutil::contains;

namespace {

namespace fs = std::filesystem;

// capture stdout/stderr around an in-process CLI invocation
struct Capture {
    std::stringstream out, err;
    std::streambuf* old_out;
    std::streambuf* old_err;
    Capture() : old_out(std::cout.rdbuf(out.rdbuf())), old_err(std::cerr.rdbuf(err.rdbuf())) {}
    ~Capture() {
        std::cout.rdbuf(old_out);
        std::cerr.rdbuf(old_err);
    }
};

struct CliResult {
    int code;
    std::string out, err;
};

CliResult run(std::vector<const char*> args) {
    args.insert(args.begin(), "softmesh");
    Capture cap;
    int code = run_cli(static_cast<int>(args.size()), args.data());
    return {code, cap.out.str(), cap.err.str()};
}

std::string tmp_dir(const std::string& name) {
    std::string dir = (fs::temp_directory_path() / name).string();
    fs::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("cli end-to-end: dataset, render, eval, reconstruct, report") {
    std::string scene = tmp_dir("sm_cli_scene");

    // --- make-dataset ---
    CliResult md = run({"make-dataset", "--shape", "sphere", "--views", "3", "--res", "24",
                        "--seed", "2", "--threads", "1", "-o", scene.c_str()});
    CHECK(md.code == 0);
    CHECK(contains(md.out, "3 views"));
    REQUIRE(fs::exists(scene + "/cameras.txt"));
    REQUIRE(fs::exists(scene + "/gt.obj"));

    // --- render a view of the ground truth ---
    std::string ppm = scene + "/probe.ppm";
    std::string mesh_path = scene + "/gt.obj";
    std::string cams_path = scene + "/cameras.txt";
    CliResult rd = run({"render", "--mesh", mesh_path.c_str(), "--cameras", cams_path.c_str(),
                        "--view", "1", "--threads", "1", "--timing", "--f32", "-o",
                        ppm.c_str()});
    CHECK(rd.code == 0);
    CHECK(contains(rd.out, "render_ms="));
    REQUIRE(fs::exists(ppm));
    REQUIRE(fs::exists(ppm + ".f32"));
    Image img = load_ppm(ppm);
    CHECK(img.width == 24);
    double sum = 0;
    for (double v : img.data) sum += v;
    CHECK(sum > 1.0);  // the object shows up

    // out-of-range view index is a runtime failure
    CliResult rd_bad = run({"render", "--mesh", mesh_path.c_str(), "--cameras",
                            cams_path.c_str(), "--view", "99", "-o", ppm.c_str()});
    CHECK(rd_bad.code == 2);
    CHECK(contains(rd_bad.err, "view index"));

    // --- eval of a mesh against itself is near zero ---
    CliResult ev = run({"eval", "--pred", mesh_path.c_str(), "--gt", mesh_path.c_str(),
                        "--samples", "20000"});
    CHECK(ev.code == 0);
    REQUIRE(contains(ev.out, "chamfer="));
    double cd = std::stod(ev.out.substr(ev.out.find("chamfer=") + 8));
    CHECK(cd > 0.0);   // independent sample draws
    CHECK(cd < 0.05);  // but the surfaces coincide

    // --- tiny reconstruct ---
    std::string run_dir = tmp_dir("sm_cli_run");
    CliResult rc = run({"reconstruct", "--scene", scene.c_str(), "--threads", "1",
                        "--set", "iters_total=4", "--set", "iters_dmtet=2",
                        "--set", "dmtet_resolution=12", "--set", "layers=2",
                        "--set", "target_edge=0.3", "--set", "checkpoint_period=0",
                        "-o", run_dir.c_str()});
    CHECK(rc.code == 0);
    CHECK(contains(rc.out, "verts="));
    CHECK(contains(rc.out, "chamfer="));
    CHECK(fs::exists(run_dir + "/resolved_config.txt"));
    CHECK(fs::exists(run_dir + "/metrics.csv"));
    CHECK(fs::exists(run_dir + "/final.obj"));
    // the snapshot records the overrides
    std::ifstream snap(run_dir + "/resolved_config.txt");
    std::string snap_text((std::istreambuf_iterator<char>(snap)),
                          std::istreambuf_iterator<char>());
    CHECK(contains(snap_text, "iters_total = 4"));
    CHECK(contains(snap_text, "dmtet_resolution = 12"));

    fs::remove_all(scene);
    fs::remove_all(run_dir);
}

TEST_CASE("cli report formats ablation tables") {
    std::string dir = tmp_dir("sm_cli_report");
    fs::create_directories(dir);
    {
        std::ofstream csv(dir + "/ablation_layers.csv");
        csv << "suite,config,cd,verts,seconds,peak_mem_mb\n"
            << "layers,layers=1,0.02,100,2.5,30\n"
            << "layers,layers=5,0.01,120,7.5,42\n";
    }
    CliResult rp = run({"report", "-i", dir.c_str()});
    CHECK(rp.code == 0);
    CHECK(contains(rp.out, "mem_mb"));
    CHECK(contains(rp.out, "layers=5"));
    CHECK(contains(rp.out, "0.01"));

    // write to a file instead
    std::string table = dir + "/table.txt";
    CliResult rp2 = run({"report", "-i", dir.c_str(), "-o", table.c_str()});
    CHECK(rp2.code == 0);
    CHECK(fs::exists(table));

    // malformed csv is a runtime failure
    {
        std::ofstream csv(dir + "/ablation_bad.csv");
        csv << "wrong,header\n";
    }
    CliResult rp3 = run({"report", "-i", dir.c_str()});
    CHECK(rp3.code == 2);
    CHECK(contains(rp3.err, "not an ablation CSV"));
    fs::remove_all(dir);
}

TEST_CASE("cli exit codes separate usage from runtime failures") {
    // no subcommand
    CHECK(run({}).code == 1);
    // unknown option
    CHECK(run({"make-dataset", "--shape", "sphere", "--wat", "-o", "/tmp/x"}).code == 1);
    // missing required option
    CHECK(run({"make-dataset", "--shape", "sphere"}).code == 1);
    // out-of-range option value
    CHECK(run({"make-dataset", "--shape", "sphere", "--views", "1", "-o", "/tmp/x"}).code == 1);
    // bad shape name
    CHECK(run({"make-dataset", "--shape", "banana", "-o", "/tmp/x"}).code == 1);
    // bad --set key is a configuration error, not a crash
    CliResult rc = run({"reconstruct", "--scene", "/tmp/nope_scene", "--set", "banana=1", "-o",
                        "/tmp/nope_out"});
    CHECK(rc.code == 1);
    CHECK(contains(rc.err, "banana"));
    // a valid config but missing scene directory fails at runtime
    CliResult rc2 = run({"reconstruct", "--scene", "/tmp/definitely_missing_scene", "-o",
                         "/tmp/nope_out2"});
    CHECK(rc2.code == 2);
    fs::remove_all("/tmp/nope_out2");  // snapshot dir is created before the scene loads
    // help is a clean exit
    CHECK(run({"--help"}).code == 0);
    CHECK(run({"render", "--help"}).code == 0);
}

TEST_CASE("cli validates config consistency before running") {
    CliResult rc = run({"reconstruct", "--scene", "/tmp/never_read", "--set",
                        "iters_dmtet=50", "--set", "iters_total=10", "-o", "/tmp/never_out"});
    CHECK(rc.code == 1);  // schedule inconsistency caught in resolution phase
    CHECK(contains(rc.err, "error:"));
}

// End-to-end scenario runs on small ensembles: artifact layout, manifest
// checksums, and byte-level reproducibility across runs and thread counts.

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nslit/scenario.hpp"
#include "nslit/stats.hpp"

using namespace nslit;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    REQUIRE(is);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

ExperimentConfig small_config(std::size_t count = 300) {
    ExperimentConfig cfg = preset_config("fig3");
    cfg.ensemble_count = count;
    cfg.integrator.dt = 8e-3;
    cfg.t_screen = 2.0;
    cfg.outputs.trajectory_count = 20;
    return cfg;
}

fs::path temp_dir(const char* tag) {
    const fs::path p = fs::temp_directory_path() / (std::string("nslit_test_") + tag);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("run_scenario writes the declared artifacts with matching checksums") {
    const fs::path dir = temp_dir("artifacts");
    RunOptions opt;
    opt.out_dir = dir.string();
    opt.emit_fields = true;
    const RunManifest manifest = run_scenario(small_config(), opt);

    CHECK(fs::exists(dir / "manifest.json"));
    REQUIRE(manifest.artifacts.size() >= 4);  // trajectories, histogram, fields, diagnostics
    for (const ArtifactEntry& a : manifest.artifacts) {
        CAPTURE(a.name);
        REQUIRE(fs::exists(dir / a.name));
        const std::string content = slurp(dir / a.name);
        CHECK(content.size() == a.bytes);
        char hex[24];
        std::snprintf(hex, sizeof(hex), "%016llx",
                      static_cast<unsigned long long>(fnv1a64(content)));
        CHECK(a.fnv1a64_hex == hex);
    }

    SUBCASE("trajectory and histogram tables carry the documented headers") {
        CHECK(slurp(dir / "trajectories.csv").rfind("trajectory_id,t,x\n", 0) == 0);
        CHECK(slurp(dir / "histogram.csv").rfind("bin_lo,bin_hi,count\n", 0) == 0);
        CHECK(slurp(dir / "fields.csv").rfind("t,x,P_tot\n", 0) == 0);
    }
}

TEST_CASE("identical config and seed give byte-identical data artifacts") {
    const fs::path dir_a = temp_dir("repro_a");
    const fs::path dir_b = temp_dir("repro_b");
    RunOptions a;
    a.out_dir = dir_a.string();
    a.threads = 1;
    RunOptions b;
    b.out_dir = dir_b.string();
    b.threads = 2;  // thread count must not leak into the artifacts

    const ExperimentConfig cfg = small_config();
    const RunManifest ma = run_scenario(cfg, a);
    const RunManifest mb = run_scenario(cfg, b);

    REQUIRE(ma.artifacts.size() == mb.artifacts.size());
    for (std::size_t i = 0; i < ma.artifacts.size(); ++i) {
        CAPTURE(ma.artifacts[i].name);
        CHECK(ma.artifacts[i].fnv1a64_hex == mb.artifacts[i].fnv1a64_hex);
        CHECK(slurp(dir_a / ma.artifacts[i].name) == slurp(dir_b / mb.artifacts[i].name));
    }

    SUBCASE("a different seed changes the data") {
        const fs::path dir_c = temp_dir("repro_c");
        RunOptions c;
        c.out_dir = dir_c.string();
        c.has_seed = true;
        c.seed = cfg.seed + 1;
        const RunManifest mc = run_scenario(cfg, c);
        CHECK(slurp(dir_a / "histogram.csv") != slurp(dir_c / "histogram.csv"));
    }
}

TEST_CASE("switching run records momentum kicks; a post-screen event degenerates to static") {
    ExperimentConfig cfg = preset_config("switching");
    cfg.ensemble_count = 400;
    cfg.integrator.dt = 8e-3;
    cfg.outputs.trajectory_count = 10;

    const fs::path dir = temp_dir("switching");
    RunOptions opt;
    opt.out_dir = dir.string();
    const RunManifest manifest = run_scenario(cfg, opt);
    CHECK(fs::exists(dir / "momentum_kicks.csv"));
    REQUIRE_FALSE(manifest.momentum_kick_summary.empty());

    // static twin: same single slit, no events
    ExperimentConfig static_cfg = cfg;
    static_cfg.events.clear();

    // event after the screen time: no query ever reaches it, so the data
    // artifacts must match the static run byte for byte
    ExperimentConfig late_cfg = cfg;
    late_cfg.events[0].time = cfg.t_screen + 1.0;

    const fs::path dir_static = temp_dir("switch_static");
    const fs::path dir_late = temp_dir("switch_late");
    RunOptions o1, o2;
    o1.out_dir = dir_static.string();
    o2.out_dir = dir_late.string();
    run_scenario(static_cfg, o1);
    run_scenario(late_cfg, o2);
    for (const char* name : {"trajectories.csv", "histogram.csv"})
        CHECK(slurp(dir_static / name) == slurp(dir_late / name));
}

TEST_CASE("two-particle scenario emits per-particle artifacts") {
    ExperimentConfig cfg = preset_config("two-particle");
    cfg.ensemble_count = 200;
    cfg.integrator.dt = 8e-3;
    cfg.t_screen = 1.5;
    cfg.outputs.trajectory_count = 8;
    const fs::path dir = temp_dir("two_particle");
    RunOptions opt;
    opt.out_dir = dir.string();
    run_scenario(cfg, opt);
    for (const char* name : {"trajectories_p0.csv", "trajectories_p1.csv", "histogram_p0.csv",
                             "histogram_p1.csv"})
        CHECK(fs::exists(dir / name));
}

TEST_CASE("oracle guard passes on a healthy config and dumps the grid density") {
    ExperimentConfig cfg = small_config(50);
    const fs::path dir = temp_dir("guard");
    RunOptions opt;
    opt.out_dir = dir.string();
    opt.check_oracle = true;
    const RunManifest manifest = run_scenario(cfg, opt);
    CHECK(manifest.oracle_velocity_deviation >= 0.0);
    CHECK(manifest.oracle_velocity_deviation < 1e-6);
    CHECK(slurp(dir / "oracle_density.csv").rfind("t,x,P_grid\n", 0) == 0);
}

TEST_CASE("NSLIT_OUT_DIR prefixes the default output directory") {
    const fs::path base = temp_dir("envdir");
    setenv("NSLIT_OUT_DIR", base.c_str(), 1);
    ExperimentConfig cfg = small_config(20);
    cfg.outputs.directory = "nested";
    run_scenario(cfg, RunOptions{});  // no explicit out_dir
    unsetenv("NSLIT_OUT_DIR");
    CHECK(fs::exists(base / "nested" / "histogram.csv"));
}

TEST_CASE("unwritable output directory raises a configuration error") {
    ExperimentConfig cfg = small_config(10);
    RunOptions opt;
    opt.out_dir = "/proc/nslit_cannot_write_here";
    CHECK_THROWS_AS(run_scenario(cfg, opt), ConfigError);
}

TEST_CASE("diagnostics runner emits the table and a summary block") {
    ExperimentConfig cfg = small_config(10);
    const fs::path dir = temp_dir("diagnose");
    RunOptions opt;
    opt.out_dir = dir.string();
    const std::string summary = run_diagnostics(cfg, opt);
    CHECK(fs::exists(dir / "diagnostics.csv"));
    CHECK(summary.find("hj_residual_norm") != std::string::npos);
    CHECK(summary.find("continuity_residual_norm") != std::string::npos);
    CHECK(slurp(dir / "diagnostics.csv").rfind("table,x,value\n", 0) == 0);
}

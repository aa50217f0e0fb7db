#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pansharp/cli.hpp"
#include "pansharp/experiment.hpp"
#include "pansharp/io.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace pansharp;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("pansharp_cli_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

struct Run {
    int code;
    std::string out, err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

// Synthetic original-resolution pair: 4 bands on 32x32, Pan 128x128.
void write_scene(const TempDir& dir) {
    SynthParams p;
    p.ms_size = 32;
    p.provider_weights = {0.2, 0.3, 0.3, 0.1};
    p.band_means = {300, 400, 350, 500};
    const auto s = make_synthetic_scene(9, p);
    io::save_image(s.ms, dir / "ms");
    io::save_image(MultibandImage({s.pan}), dir / "pan");
}

} // namespace

TEST_CASE("degrade writes reduced images and provenance") {
    TempDir dir;
    write_scene(dir);
    const auto r = cli({"degrade", "--ms", dir / "ms", "--pan", dir / "pan", "--ratio", "2", "--pan-ratio", "8",
                        "--out", dir / "deg"});
    REQUIRE(r.code == 0);
    const auto ms_lr = io::load_image(dir / "deg/ms_lr");
    const auto pan_lr = io::load_image(dir / "deg/pan_lr");
    CHECK(ms_lr.width() == 16);
    CHECK(pan_lr.width() == 16);
    const auto prov = nlohmann::json::parse(slurp(dir / "deg/degrade.json"));
    CHECK(prov["ms_filter"]["ratio"] == 2);
    CHECK(prov["pan_filter"]["ratio"] == 8);
    CHECK(prov["ms_filter"]["cutoff"].get<double>() == doctest::Approx(0.25));
}

TEST_CASE("degrade keeps a constant scene constant") {
    TempDir dir;
    io::save_image(MultibandImage({Raster(8, 8, 42.0), Raster(8, 8, 7.0)}), dir / "ms");
    io::save_image(MultibandImage({Raster(16, 16, 42.0)}), dir / "pan");
    REQUIRE(cli({"degrade", "--ms", dir / "ms", "--pan", dir / "pan", "--ratio", "2", "--pan-ratio", "4",
                 "--out", dir / "deg"}).code == 0);
    const auto ms_lr = io::load_image(dir / "deg/ms_lr");
    for (double v : ms_lr.band(0).samples()) CHECK(v == doctest::Approx(42.0).epsilon(1e-6));
    for (double v : ms_lr.band(1).samples()) CHECK(v == doctest::Approx(7.0).epsilon(1e-6));
    const auto pan_lr = io::load_image(dir / "deg/pan_lr");
    for (double v : pan_lr.band(0).samples()) CHECK(v == doctest::Approx(42.0).epsilon(1e-6));
}

TEST_CASE("usage errors exit with 2") {
    TempDir dir;
    auto r = cli({"degrade", "--ms", dir / "ms"});
    CHECK(r.code == 2);
    CHECK(r.err.find("--pan") != std::string::npos);
    CHECK(r.err.find("Usage") != std::string::npos);
    CHECK(cli({}).code == 2);
    CHECK(cli({"bogus"}).code == 2);
    CHECK(cli({"--help"}).code == 0);
    CHECK(cli({"experiment", "--modes", ""}).code == 2);
    CHECK(cli({"experiment", "--modes", "phm-nope"}).code == 2);
    CHECK(cli({"fuse", "--ms", dir / "ms", "--pan", dir / "pan", "--method", "brovey"}).code == 2);
}

TEST_CASE("missing files are runtime failures") {
    TempDir dir;
    const auto r = cli({"degrade", "--ms", dir / "absent", "--pan", dir / "absent", "--out", dir / "o"});
    CHECK(r.code == 1);
    CHECK(r.err.find("absent") != std::string::npos);
}

TEST_CASE("fuse with defaults") {
    TempDir dir;
    write_scene(dir);
    REQUIRE(cli({"degrade", "--ms", dir / "ms", "--pan", dir / "pan", "--ratio", "2", "--pan-ratio", "8",
                 "--out", dir / "deg"}).code == 0);
    std::ofstream(dir / "w.json") << "[0.2, 0.3, 0.3, 0.1]";
    const auto r = cli({"fuse", "--ms", dir / "deg/ms_lr", "--pan", dir / "deg/pan_lr", "--weights", dir / "w.json",
                        "--out", dir / "fused"});
    CHECK(r.code == 0);
    CHECK(r.err.empty());
    const auto fused = io::load_image(dir / "fused/fused");
    CHECK(fused.band_count() == 4);
    CHECK(fused.width() == 16);
    const auto report = nlohmann::json::parse(slurp(dir / "fused/report.json"));
    CHECK(report["mode"] == "PC + W_low + MHM");
    CHECK(report["fusion_weights"].size() == 4);
    CHECK(report["correction_weights"].size() == 4);
    CHECK(slurp(dir / "fused/report.csv").rfind("mode,method,band_1,band_2,band_3,band_4,mean\n", 0) == 0);
}

TEST_CASE("fuse against a reference reports rmse") {
    TempDir dir;
    write_scene(dir);
    REQUIRE(cli({"degrade", "--ms", dir / "ms", "--pan", dir / "pan", "--ratio", "2", "--pan-ratio", "4",
                 "--out", dir / "deg"}).code == 0);
    const auto r = cli({"fuse", "--ms", dir / "deg/ms_lr", "--pan", dir / "deg/pan_lr", "--method", "cs_a",
                        "--reference", dir / "ms", "--out", dir / "fused"});
    REQUIRE(r.code == 0);
    const auto report = nlohmann::json::parse(slurp(dir / "fused/report.json"));
    REQUIRE(report.contains("rmse"));
    CHECK(report["rmse"]["per_band"].size() == 4);
    CHECK(report["rmse"]["mean"].get<double>() > 0.0);
}

TEST_CASE("fuse msi warns about ignored corrections") {
    TempDir dir;
    write_scene(dir);
    const auto r = cli({"fuse", "--ms", dir / "ms", "--pan", dir / "pan", "--method", "msi", "--out", dir / "f"});
    CHECK(r.code == 0);
    CHECK(r.err.find("warning:") != std::string::npos);
    CHECK(io::load_image(dir / "f/fused").width() == 128);
}

TEST_CASE("fuse rejects a weight vector of the wrong length") {
    TempDir dir;
    write_scene(dir);
    std::ofstream(dir / "w.json") << "[0.5, 0.5, 0.5]";
    const auto r = cli({"fuse", "--ms", dir / "ms", "--pan", dir / "pan", "--weights", dir / "w.json",
                        "--out", dir / "f"});
    CHECK(r.code == 2);
    CHECK(r.err.find("K = 4") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "f/fused.raw"));
}

TEST_CASE("experiment output is reproducible for a fixed seed") {
    TempDir dir;
    const std::vector<std::string> base = {"experiment", "--seed", "7", "--size", "32", "--modes", "before,pc",
                                           "--method", "msi,cs_m,hpf_a", "--weight-source", "estimated_low",
                                           "--no-mhm"};
    auto a = base, b = base;
    a.insert(a.end(), {"--out", dir / "a", "--threads", "1"});
    b.insert(b.end(), {"--out", dir / "b", "--threads", "3"});
    REQUIRE(cli(a).code == 0);
    REQUIRE(cli(b).code == 0);
    for (const char* f : {"runs.csv", "pan_correction.csv", "method_comparison.csv", "per_band.csv"}) {
        const auto x = slurp(dir.path / "a" / f);
        CHECK_FALSE(x.empty());
        CHECK(x == slurp(dir.path / "b" / f));
    }
    CHECK(slurp(dir.path / "a/method_comparison.csv").rfind("mode,msi,cs_m,hpf_a\n", 0) == 0);
}

TEST_CASE("installed binary exit codes") {
    const char* exe = std::getenv("PANSHARP_CLI");
    if (!exe) return;
    TempDir dir;
    const std::string quiet = " >/dev/null 2>&1";
    auto status = [&](const std::string& args) {
        const int s = std::system((std::string(exe) + " " + args + quiet).c_str());
        return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
    };
    CHECK(status("--help") == 0);
    CHECK(status("degrade --ms " + (dir / "ms")) == 2);
    CHECK(status("degrade --ms " + (dir / "ms") + " --pan " + (dir / "pan") + " --out " + (dir / "o")) == 1);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pansharp/error.hpp"
#include "pansharp/experiment.hpp"
#include "pansharp/io.hpp"

#include <filesystem>
#include <sstream>

using namespace pansharp;

namespace {

ExperimentSpec small_spec() {
    ExperimentSpec s;
    s.modes = {parse_adjustment_mode("before"), parse_adjustment_mode("pc")};
    s.weight_sources = {WeightSource::estimated_low};
    s.mhm = {false};
    s.methods = {FusionMethod::cs_m};
    s.synth.ms_size = 48;
    s.seed = 5;
    return s;
}

std::size_t line_count(const std::string& s) {
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

} // namespace

TEST_CASE("mode tokens round trip") {
    for (const char* t : {"before", "pc", "phm-full-low", "phm-full-high", "phm-simple-low",
                          "phm-simple-high+pc", "phm-full-low+pc"}) {
        CHECK(to_token(parse_adjustment_mode(t)) == t);
    }
    CHECK(parse_adjustment_mode("pc+phm-simple-high").label() == "PHM, simple, high + PC");
    CHECK(parse_adjustment_mode("none") == AdjustmentMode{});
    for (const char* bad : {"", "pc+pc", "before+pc", "phm-median-low", "phm-full-mid", "pc+", "+pc", "pc++phm-full-low", "hist"}) {
        CHECK_THROWS_AS(parse_adjustment_mode(bad), InvalidArgument);
    }
}

TEST_CASE("wald inputs") {
    SynthParams p;
    p.ms_size = 32;
    const auto scene = make_synthetic_scene(1, p);
    CHECK(scene.pan.width() == 128);
    const auto in = prepare_wald_inputs(scene.ms, scene.pan, 2);
    CHECK(in.ms_lr.width() == 16);
    CHECK(in.pan_hr.width() == 32);
    CHECK(in.reference == scene.ms);
    CHECK(in.filter.ratio == 2);
    CHECK(in.filter.cutoff == doctest::Approx(0.25));
    CHECK_THROWS_AS(prepare_wald_inputs(scene.ms, Raster(100, 100), 2), DimensionError);
}

TEST_CASE("two-mode grid over one method") {
    const auto r = run_experiment(small_spec());
    REQUIRE(r.runs.size() == 2);
    CHECK_FALSE(r.any_failed());
    CHECK(r.runs[0].report.mode == "Before correction + W_low");
    CHECK(r.runs[1].report.mode == "PC + W_low");
    CHECK(r.runs[1].report.rmse->mean < r.runs[0].report.rmse->mean);
    REQUIRE(r.pan_correction.size() == 2);
    CHECK(r.pan_correction[1].rmse_low < r.pan_correction[0].rmse_low);

    CHECK(line_count(r.runs_csv()) == 3);
    CHECK(r.runs_csv().rfind("mode,method,band_1,", 0) == 0);
    CHECK(r.pan_correction_csv().rfind("correction,rmse_hr,rmse_lr,status\n\"Before correction\",", 0) == 0);
    CHECK(r.method_comparison_csv().rfind("mode,cs_m\n", 0) == 0);
    CHECK(line_count(r.method_comparison_csv()) == 3);
    const auto per_band = r.per_band_csv(std::nullopt);
    CHECK(line_count(per_band) == 10);
    CHECK(per_band.find("Mean of all bands,") != std::string::npos);
    CHECK_THROWS_AS(r.per_band_csv(std::string("nope")), InvalidArgument);
}

TEST_CASE("msi appears once as the first column") {
    auto s = small_spec();
    s.methods = {FusionMethod::msi, FusionMethod::cs_a};
    const auto r = run_experiment(s);
    REQUIRE(r.runs.size() == 3);
    CHECK(r.runs[0].report.mode == "MSI");
    const auto table = r.method_comparison_csv();
    std::istringstream in(table);
    std::string header, row1, row2;
    std::getline(in, header);
    std::getline(in, row1);
    std::getline(in, row2);
    CHECK(header == "mode,msi,cs_a");
    CHECK(row1.find(",-") == std::string::npos);
    CHECK(row2.rfind("\"PC + W_low\",-,", 0) == 0);
}

TEST_CASE("invalid grids are rejected before any work") {
    auto s = small_spec();
    s.modes.clear();
    CHECK_THROWS_AS(run_experiment(s), InvalidArgument);
    s = small_spec();
    s.methods.clear();
    CHECK_THROWS_AS(run_experiment(s), InvalidArgument);
    s = small_spec();
    s.repeats = 0;
    CHECK_THROWS_AS(s.validate(), InvalidArgument);
    s = small_spec();
    s.ms_path = "x";
    CHECK_THROWS_AS(s.validate(), InvalidArgument);
    CHECK_NOTHROW(ExperimentSpec::full_grid().validate());
    CHECK(ExperimentSpec::full_grid().modes.size() == 10);
}

TEST_CASE("failed rows are reported without aborting the grid") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "pansharp_experiment_fail";
    fs::create_directories(dir);
    // A constant Pan makes simple histogram matching fail; other rows still run.
    std::vector<Raster> bands;
    for (int k = 0; k < 2; ++k) {
        Raster b(16, 16);
        for (std::size_t i = 0; i < b.size(); ++i) b[i] = 100.0 + static_cast<double>((i * (k + 3)) % 17);
        bands.push_back(b);
    }
    io::save_image(MultibandImage(bands), dir / "ms");
    io::save_image(MultibandImage({Raster(32, 32, 50.0)}), dir / "pan");
    auto s = small_spec();
    s.ms_path = (dir / "ms").string();
    s.pan_path = (dir / "pan").string();
    s.modes.push_back(parse_adjustment_mode("phm-simple-high"));
    const auto r = run_experiment(s);
    fs::remove_all(dir);
    REQUIRE(r.runs.size() == 3);
    CHECK(r.any_failed());
    CHECK(r.runs[0].error.empty());
    CHECK_FALSE(r.runs[2].error.empty());
    CHECK(r.runs_csv().find("\"error: ") != std::string::npos);
}

TEST_CASE("results do not depend on the worker count") {
    auto s = small_spec();
    s.modes.push_back(parse_adjustment_mode("phm-full-low+pc"));
    s.methods = {FusionMethod::msi, FusionMethod::cs_a, FusionMethod::hpf_m};
    s.mhm = {false, true};
    s.repeats = 2;
    const auto one = run_experiment(s, 1);
    const auto four = run_experiment(s, 4);
    CHECK(one.runs_csv() == four.runs_csv());
    CHECK(one.pan_correction_csv() == four.pan_correction_csv());
    CHECK(one.method_comparison_csv() == four.method_comparison_csv());
}

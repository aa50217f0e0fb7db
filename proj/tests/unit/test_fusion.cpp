#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pansharp/error.hpp"
#include "pansharp/experiment.hpp"
#include "pansharp/fusion.hpp"

#include "../support/oracles.hpp"
#include "../support/test_util.hpp"

#include <algorithm>
#include <cmath>

using namespace pansharp;

namespace {

MultibandImage px(double v) { return MultibandImage({Raster(1, 1, v)}); }


FusionConfig plain(FusionMethod m, int ratio) {
    FusionConfig c;
    c.method = m;
    c.adjustment = AdjustmentMode{};
    c.weight_source = WeightSource::provider;
    c.mhm = false;
    c.filter = FilterSpec::for_ratio(ratio);
    return c;
}

SynthParams small_scene() {
    SynthParams p;
    p.ms_size = 64;
    return p;
}

} // namespace

TEST_CASE("pixel examples of the injection models") {
    const Raster p(1, 1, 50.0), i(1, 1, 40.0);
    CHECK(fuse_cs(px(100), p, i, Injection::additive, 1e-6).band(0)[0] == doctest::Approx(110.0));
    CHECK(fuse_cs(px(100), p, i, Injection::multiplicative, 1e-6).band(0)[0] == doctest::Approx(125.0));
    CHECK(fuse_cs(px(100), p, i, Injection::additive_ratio, 1e-6).band(0)[0] == doctest::Approx(101.25));
    CHECK_THROWS_AS(fuse_cs(px(100), Raster(2, 1), i, Injection::additive, 1e-6), DimensionError);
    CHECK_THROWS_AS(fuse_hpf(px(100), p, Raster(1, 2), Injection::additive, 1e-6), DimensionError);
}

TEST_CASE("zero detail leaves the upsampled bands untouched") {
    std::mt19937_64 rng(1);
    const auto ms = testutil::random_image(12, 10, 3, rng, 10, 500);
    const Raster i = intensity(ms, SpectralWeights({0.2, 0.3, 0.4}));
    for (auto v : {Injection::additive, Injection::multiplicative}) {
        CHECK(fuse_cs(ms, i, i, v, 1e-6) == ms);
    }
    const Raster c(12, 10, 321.0);
    const Raster c_low = lowpass(c, FilterSpec::for_ratio(2));
    for (auto v : {Injection::additive, Injection::multiplicative}) {
        const auto out = fuse_hpf(ms, c, c_low, v, 1e-6);
        for (std::size_t k = 0; k < 3; ++k) CHECK(testutil::max_abs_diff(out.band(k), ms.band(k)) <= 1e-10);
    }
}

TEST_CASE("detail is injected identically into every band") {
    std::mt19937_64 rng(2);
    const auto ms = testutil::random_image(16, 16, 4, rng, 50, 300);
    Raster pan(16, 16, 100.0);
    for (std::size_t y = 0; y < 16; ++y)
        for (std::size_t x = 8; x < 16; ++x) pan(x, y) = 180.0;
    const Raster low = lowpass(pan, FilterSpec::for_ratio(2));
    const auto add = fuse_hpf(ms, pan, low, Injection::additive, 1e-6);
    for (std::size_t k = 0; k < 4; ++k) {
        for (std::size_t i = 0; i < pan.size(); ++i) {
            CHECK(std::abs(add.band(k)[i] - ms.band(k)[i] - (pan[i] - low[i])) <= 1e-10);
        }
    }

    const Raster in = intensity(ms, SpectralWeights({0.25, 0.25, 0.25, 0.25}));
    const auto mul = fuse_cs(ms, pan, in, Injection::multiplicative, 1e-6);
    const auto cs_add = fuse_cs(ms, pan, in, Injection::additive, 1e-6);
    for (std::size_t i = 0; i < pan.size(); ++i) {
        const double ratio0 = mul.band(0)[i] / ms.band(0)[i];
        const double diff0 = cs_add.band(0)[i] - ms.band(0)[i];
        for (std::size_t k = 1; k < 4; ++k) {
            CHECK(std::abs(mul.band(k)[i] / ms.band(k)[i] - ratio0) <= 1e-10 * std::abs(ratio0));
            CHECK(std::abs(cs_add.band(k)[i] - ms.band(k)[i] - diff0) <= 1e-10 * 300);
        }
    }
}

TEST_CASE("msi is plain bicubic upsampling") {
    std::mt19937_64 rng(3);
    const auto ms = testutil::random_image(5, 4, 2, rng);
    CHECK(fuse_msi(ms, 1) == ms);
    const auto c = fuse_msi(MultibandImage({Raster(3, 3, 6.0)}), 4);
    for (double v : c.band(0).samples()) CHECK(v == doctest::Approx(6.0));
}

TEST_CASE("post-fusion histogram matching") {
    std::mt19937_64 rng(4);
    const auto ms = testutil::random_image(24, 24, 3, rng, 100, 900);
    const int bins = kDefaultHistogramBins;

    const auto self = match_ms_after_fusion(fuse_msi(ms, 1), ms, bins);
    for (std::size_t k = 0; k < 3; ++k) {
        const auto [lo, hi] = value_range(ms.band(k));
        CHECK(testutil::max_abs_diff(self.band(k), ms.band(k)) <= (hi - lo) / bins);
    }

    std::vector<Raster> shifted;
    for (const auto& b : ms.bands()) {
        Raster s = b;
        for (double& v : s.samples()) v += 37.0;
        shifted.push_back(s);
    }
    const auto unshifted = match_ms_after_fusion(MultibandImage(shifted), ms, bins);
    for (std::size_t k = 0; k < 3; ++k) {
        const auto [lo, hi] = value_range(ms.band(k));
        CHECK(testutil::max_abs_diff(unshifted.band(k), ms.band(k)) <= (hi + 37.0 - lo) / bins);
    }

    const auto fused = testutil::random_image(48, 48, 3, rng, 0, 2000);
    const auto matched = match_ms_after_fusion(fused, ms, bins);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(testutil::ks_distance(matched.band(k), ms.band(k)) <= 2.0 / bins + 2.0 / std::sqrt(24.0 * 24.0));
    }
    CHECK_THROWS_AS(match_ms_after_fusion(fused, MultibandImage({ms.band(0)})), DimensionError);
}

TEST_CASE("config labels and csv rows") {
    FusionConfig c;
    CHECK(c.mode_label() == "PC + W_low + MHM");
    c.method = FusionMethod::msi;
    CHECK(c.mode_label() == "MSI");
    c = plain(FusionMethod::cs_a, 2);
    CHECK(c.mode_label() == "Before correction");
    c.adjustment.phm = HistogramMatching::full;
    c.weight_source = WeightSource::estimated_high;
    CHECK(c.mode_label() == "PHM, full, low + W_high");
    c.epsilon = 0.0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);

    CHECK(WorkflowReport::csv_header(2) == "mode,method,band_1,band_2,mean");
    WorkflowReport r;
    r.mode = "PC";
    r.method = FusionMethod::hpf_m;
    CHECK(r.csv_row(2) == "\"PC\",hpf_m,,,");
    r.rmse = RmseReport{{1.0, 2.5}, 1.75, std::nullopt};
    CHECK(r.csv_row(2) == "\"PC\",hpf_m,1.000000,2.500000,1.750000");

    for (auto m : {FusionMethod::cs_a, FusionMethod::cs_m, FusionMethod::hpf_a, FusionMethod::hpf_m,
                   FusionMethod::msi}) {
        CHECK(parse_method(to_string(m)) == m);
    }
    CHECK_THROWS_AS(parse_method("brovey"), InvalidArgument);
    CHECK_THROWS_AS(parse_weight_source("guess"), InvalidArgument);
}

TEST_CASE("workflow: pan equal to the intensity reproduces the upsampled MS") {
    std::mt19937_64 rng(5);
    const auto ms = testutil::random_image(8, 8, 3, rng, 100, 400);
    const SpectralWeights w0({0.3, 0.4, 0.2});
    const auto up = upsample_bicubic(ms, 2);
    const auto res = run_workflow(ms, intensity(up, w0), plain(FusionMethod::cs_a, 2), w0);
    CHECK(res.fused == up);
    CHECK(res.report.fusion_weights == w0);
}

TEST_CASE("workflow: hpf at ratio one with a near-allpass filter") {
    const auto ms = MultibandImage({testutil::smooth_pattern(32, 32, 200.0),
                                    testutil::smooth_pattern(32, 32, 300.0)});
    const Raster pan = testutil::smooth_pattern(32, 32, 250.0);
    FusionConfig c = plain(FusionMethod::hpf_a, 1);
    c.filter = FilterSpec{FilterKind::butterworth, 0.5, 20, 1};
    const auto res = run_workflow(ms, pan, c, SpectralWeights({0.5, 0.5}));
    for (std::size_t k = 0; k < 2; ++k) {
        for (std::size_t i = 0; i < pan.size(); ++i) {
            CHECK(std::abs(res.fused.band(k)[i] - ms.band(k)[i]) <= 0.01 * ms.band(k)[i]);
        }
    }
}

TEST_CASE("workflow input validation") {
    std::mt19937_64 rng(6);
    const auto ms = testutil::random_image(8, 8, 3, rng, 1, 2);
    CHECK_THROWS_AS(run_workflow(ms, Raster(15, 16), plain(FusionMethod::cs_m, 2), SpectralWeights::uniform(3)),
                    DimensionError);
    CHECK_THROWS_AS(run_workflow(ms, Raster(16, 16, 1.0), plain(FusionMethod::cs_m, 2), SpectralWeights::uniform(2)),
                    DimensionError);
}

TEST_CASE("workflow: msi ignores corrections with a warning") {
    std::mt19937_64 rng(7);
    const auto ms = testutil::random_image(8, 8, 2, rng, 1, 2);
    FusionConfig c;
    c.method = FusionMethod::msi;
    const auto res = run_workflow(ms, Raster(16, 16, 1.0), c, SpectralWeights::uniform(2));
    CHECK(res.fused == upsample_bicubic(ms, 2));
    CHECK(res.report.warnings.size() == 1);
    CHECK(run_workflow(ms, Raster(16, 16, 1.0), plain(FusionMethod::msi, 2), SpectralWeights::uniform(2))
              .report.warnings.empty());
}

TEST_CASE("workflow is deterministic") {
    const auto scene = make_synthetic_scene(3, small_scene());
    const auto in = prepare_wald_inputs(scene.ms, scene.pan, 2);
    FusionConfig c;
    c.filter = in.filter;
    c.adjustment.phm = HistogramMatching::full;
    const SpectralWeights w0(scene.provider_weights);
    const auto a = run_workflow(in.ms_lr, in.pan_hr, c, w0);
    const auto b = run_workflow(in.ms_lr, in.pan_hr, c, w0);
    CHECK(a.fused == b.fused);
    CHECK(a.corrected_pan == b.corrected_pan);
}

TEST_CASE("fusion beats plain upsampling and stays consistent with the low-resolution input") {
    const auto scene = make_synthetic_scene(11, small_scene());
    const auto in = prepare_wald_inputs(scene.ms, scene.pan, 2);
    const SpectralWeights w0(scene.provider_weights);

    FusionConfig best;
    best.filter = in.filter;
    auto fused = run_workflow(in.ms_lr, in.pan_hr, best, w0);
    evaluate_workflow(fused, in.reference);
    auto msi = run_workflow(in.ms_lr, in.pan_hr, plain(FusionMethod::msi, 2), w0);
    evaluate_workflow(msi, in.reference);
    CHECK(fused.report.rmse->mean < msi.report.rmse->mean);

    double mean_sum = 0.0;
    for (double v : fused.report.rmse->per_band) mean_sum += v;
    CHECK(fused.report.rmse->mean == doctest::Approx(mean_sum / 8.0).epsilon(1e-12));

    for (auto m : {FusionMethod::cs_a, FusionMethod::cs_m, FusionMethod::hpf_a, FusionMethod::hpf_m}) {
        FusionConfig c = best;
        c.method = m;
        const auto res = run_workflow(in.ms_lr, in.pan_hr, c, w0);
        const auto back = pan_to_low(res.fused, in.filter);
        const auto msi_back = pan_to_low(msi.fused, in.filter);
        CHECK(rmse_image(back, in.ms_lr).mean <= 2.0 * rmse_image(msi_back, in.ms_lr).mean);
    }
}

TEST_CASE("pan correction with estimated weights improves every fusion method") {
    double before[4] = {0, 0, 0, 0}, after[4] = {0, 0, 0, 0};
    const FusionMethod methods[4] = {FusionMethod::cs_a, FusionMethod::cs_m, FusionMethod::hpf_a,
                                     FusionMethod::hpf_m};
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto scene = make_synthetic_scene(seed, small_scene());
        const auto in = prepare_wald_inputs(scene.ms, scene.pan, 2);
        const SpectralWeights w0(scene.provider_weights);
        for (int m = 0; m < 4; ++m) {
            FusionConfig c = plain(methods[m], 2);
            c.filter = in.filter;
            auto r0 = run_workflow(in.ms_lr, in.pan_hr, c, w0);
            evaluate_workflow(r0, in.reference);
            c.adjustment.pc = true;
            c.weight_source = WeightSource::estimated_low;
            auto r1 = run_workflow(in.ms_lr, in.pan_hr, c, w0);
            evaluate_workflow(r1, in.reference);
            before[m] += r0.report.rmse->mean;
            after[m] += r1.report.rmse->mean;
        }
    }
    for (int m = 0; m < 4; ++m) {
        INFO(to_string(methods[m]) << ": before " << before[m] / 3 << ", after " << after[m] / 3);
        CHECK(after[m] < before[m]);
    }
}

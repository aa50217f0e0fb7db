#pragma once

#include "pansharp/adjust.hpp"
#include "pansharp/quality.hpp"
#include "pansharp/raster.hpp"
#include "pansharp/resample.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pansharp {

enum class FusionMethod { cs_a, cs_m, hpf_a, hpf_m, msi };
enum class WeightSource { provider, estimated_low, estimated_high };

/// How detail is injected into the upsampled MS bands.
///   additive:       S + (P - L)
///   multiplicative: S * (P / L)
///   additive_ratio: S + P / L   (the operator sequence as literally printed for the
///                   multiplicative model; compatibility only)
enum class Injection { additive, multiplicative, additive_ratio };

const char* to_string(FusionMethod m);
const char* to_string(WeightSource w);
FusionMethod parse_method(const std::string& s);
WeightSource parse_weight_source(const std::string& s);

struct FusionConfig {
    FusionMethod method = FusionMethod::cs_m;
    AdjustmentMode adjustment{HistogramMatching::none, MatchScale::low, true};
    WeightSource weight_source = WeightSource::estimated_low;
    bool mhm = true;
    FilterSpec filter = FilterSpec::for_ratio(2);
    /// Safe-divide floor; unset means 1e-6 of the Pan dynamic range.
    std::optional<double> epsilon;
    /// Use Injection::additive_ratio for the multiplicative methods.
    bool literal_ratio_form = false;

    void validate() const;

    /// Mode column label, e.g. "PHM, full, low + PC + W_low + MHM".
    std::string mode_label() const;
};

struct WorkflowReport {
    std::string mode;
    FusionMethod method = FusionMethod::cs_m;
    /// Weights of the high-resolution intensity used for fusion.
    SpectralWeights fusion_weights;
    /// Weights after Pan correction (estimated when PC ran, provider otherwise).
    SpectralWeights correction_weights;
    /// RMSE between the low-resolution intensity (correction_weights) and the
    /// corrected Pan brought to the MS grid.
    double pan_low_rmse = 0.0;
    double epsilon = 0.0;
    std::vector<std::string> warnings;
    /// Filled by evaluate_workflow when a reference is available.
    std::optional<RmseReport> rmse;

    static std::string csv_header(std::size_t bands);
    /// Empty RMSE cells when no evaluation was run.
    std::string csv_row(std::size_t bands) const;
};

struct WorkflowResult {
    MultibandImage fused;
    Raster corrected_pan;
    WorkflowReport report;
};

MultibandImage fuse_cs(const MultibandImage& ms_up, const Raster& pan, const Raster& intensity_hr,
                       Injection variant, double epsilon);

/// pan_low is the low-passed Pan on the same (high-resolution) grid.
MultibandImage fuse_hpf(const MultibandImage& ms_up, const Raster& pan, const Raster& pan_low,
                        Injection variant, double epsilon);

MultibandImage fuse_msi(const MultibandImage& ms_lr, int ratio);

/// Full histogram matching of each fused band toward its low-resolution original.
MultibandImage match_ms_after_fusion(const MultibandImage& fused, const MultibandImage& ms_lr,
                                     int bins = kDefaultHistogramBins);

/// Upsample, optional PHM / PC, intensity with the configured weights, fusion,
/// optional MHM. MSI skips every correction step.
WorkflowResult run_workflow(const MultibandImage& ms_lr, const Raster& pan_hr,
                            const FusionConfig& config, const SpectralWeights& w0);

/// Fills result.report.rmse against the reference MS. pan_rmse compares the
/// reference intensity (correction weights) with the corrected Pan.
void evaluate_workflow(WorkflowResult& result, const MultibandImage& reference);

/// Fixed-point formatting shared by every CSV writer.
std::string format_value(double v);

} // namespace pansharp

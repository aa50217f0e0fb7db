#include "pansharp/fusion.hpp"

#include "pansharp/error.hpp"

#include <cstdio>
#include <string>

namespace pansharp {

const char* to_string(FusionMethod m) {
    switch (m) {
    case FusionMethod::cs_a: return "cs_a";
    case FusionMethod::cs_m: return "cs_m";
    case FusionMethod::hpf_a: return "hpf_a";
    case FusionMethod::hpf_m: return "hpf_m";
    case FusionMethod::msi: return "msi";
    }
    return "?";
}

const char* to_string(WeightSource w) {
    switch (w) {
    case WeightSource::provider: return "provider";
    case WeightSource::estimated_low: return "estimated_low";
    case WeightSource::estimated_high: return "estimated_high";
    }
    return "?";
}

FusionMethod parse_method(const std::string& s) {
    for (auto m : {FusionMethod::cs_a, FusionMethod::cs_m, FusionMethod::hpf_a,
                   FusionMethod::hpf_m, FusionMethod::msi}) {
        if (s == to_string(m)) return m;
    }
    throw InvalidArgument("unknown fusion method '" + s + "'");
}

WeightSource parse_weight_source(const std::string& s) {
    for (auto w : {WeightSource::provider, WeightSource::estimated_low,
                   WeightSource::estimated_high}) {
        if (s == to_string(w)) return w;
    }
    throw InvalidArgument("unknown weight source '" + s + "'");
}

void FusionConfig::validate() const {
    filter.validate();
    if (epsilon && !(*epsilon > 0.0)) {
        throw InvalidArgument("fusion epsilon must be positive");
    }
    if (adjustment.phm != HistogramMatching::none && adjustment.bins < 2) {
        throw InvalidArgument("histogram bins must be >= 2");
    }
}

std::string FusionConfig::mode_label() const {
    if (method == FusionMethod::msi) return "MSI";
    std::string out = adjustment.label();
    if (weight_source == WeightSource::estimated_low) out += " + W_low";
    if (weight_source == WeightSource::estimated_high) out += " + W_high";
    if (mhm) out += " + MHM";
    return out;
}

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string WorkflowReport::csv_header(std::size_t bands) {
    std::string out = "mode,method";
    for (std::size_t k = 1; k <= bands; ++k) out += ",band_" + std::to_string(k);
    return out + ",mean";
}

std::string WorkflowReport::csv_row(std::size_t bands) const {
    std::string out = "\"" + mode + "\"," + to_string(method);
    for (std::size_t k = 0; k < bands; ++k) {
        out += ",";
        if (rmse && k < rmse->per_band.size()) out += format_value(rmse->per_band[k]);
    }
    out += ",";
    if (rmse) out += format_value(rmse->mean);
    return out;
}

namespace {

void require_grid(const MultibandImage& ms, const Raster& r, const char* what) {
    if (ms.width() != r.width() || ms.height() != r.height()) {
        throw DimensionError(std::string(what) + ": all inputs must share the high-resolution grid");
    }
}

MultibandImage inject(const MultibandImage& ms_up, const Raster& pan, const Raster& reference,
                      Injection variant, double epsilon) {
    Raster detail;
    switch (variant) {
    case Injection::additive:
        detail = pixelwise_combine(pan, reference, CombineOp::subtract);
        break;
    case Injection::multiplicative:
    case Injection::additive_ratio:
        detail = pixelwise_combine(pan, reference, CombineOp::safe_divide, epsilon);
        break;
    }
    const CombineOp op = variant == Injection::multiplicative ? CombineOp::multiply : CombineOp::add;
    std::vector<Raster> bands;
    bands.reserve(ms_up.band_count());
    for (const auto& b : ms_up.bands()) bands.push_back(pixelwise_combine(b, detail, op));
    return MultibandImage(std::move(bands));
}

} // namespace

MultibandImage fuse_cs(const MultibandImage& ms_up, const Raster& pan, const Raster& intensity_hr,
                       Injection variant, double epsilon) {
    require_grid(ms_up, pan, "fuse_cs");
    require_grid(ms_up, intensity_hr, "fuse_cs");
    return inject(ms_up, pan, intensity_hr, variant, epsilon);
}

MultibandImage fuse_hpf(const MultibandImage& ms_up, const Raster& pan, const Raster& pan_low,
                        Injection variant, double epsilon) {
    require_grid(ms_up, pan, "fuse_hpf");
    require_grid(ms_up, pan_low, "fuse_hpf");
    return inject(ms_up, pan, pan_low, variant, epsilon);
}

MultibandImage fuse_msi(const MultibandImage& ms_lr, int ratio) {
    return upsample_bicubic(ms_lr, ratio);
}

MultibandImage match_ms_after_fusion(const MultibandImage& fused, const MultibandImage& ms_lr,
                                     int bins) {
    if (fused.band_count() != ms_lr.band_count()) {
        throw DimensionError("match_ms_after_fusion: fused image has " +
                             std::to_string(fused.band_count()) + " bands, reference has " +
                             std::to_string(ms_lr.band_count()));
    }
    std::vector<Raster> bands;
    bands.reserve(fused.band_count());
    for (std::size_t k = 0; k < fused.band_count(); ++k) {
        bands.push_back(match_histogram_full(fused.band(k), ms_lr.band(k), bins));
    }
    return MultibandImage(std::move(bands));
}

WorkflowResult run_workflow(const MultibandImage& ms_lr, const Raster& pan_hr,
                            const FusionConfig& config, const SpectralWeights& w0) {
    config.validate();
    const int ratio = config.filter.ratio;
    const auto ur = static_cast<std::size_t>(ratio);
    if (ms_lr.width() * ur != pan_hr.width() || ms_lr.height() * ur != pan_hr.height()) {
        throw DimensionError("run_workflow: Pan " + std::to_string(pan_hr.width()) + "x" +
                             std::to_string(pan_hr.height()) + " is not MS " +
                             std::to_string(ms_lr.width()) + "x" + std::to_string(ms_lr.height()) +
                             " times ratio " + std::to_string(ratio));
    }
    if (w0.size() != ms_lr.band_count()) {
        throw DimensionError("run_workflow: provider weights have length " +
                             std::to_string(w0.size()) + ", expected " +
                             std::to_string(ms_lr.band_count()));
    }

    WorkflowResult result;
    auto& report = result.report;
    report.mode = config.mode_label();
    report.method = config.method;

    MultibandImage ms_up = upsample_bicubic(ms_lr, ratio);

    if (config.method == FusionMethod::msi) {
        if (config.adjustment.phm != HistogramMatching::none || config.adjustment.pc ||
            config.mhm || config.weight_source != WeightSource::provider) {
            report.warnings.emplace_back("corrections are not applicable to MSI and were ignored");
        }
        report.fusion_weights = w0;
        report.correction_weights = w0;
        report.pan_low_rmse = rmse_band(intensity(ms_lr, w0), pan_to_low(pan_hr, config.filter));
        result.fused = std::move(ms_up);
        result.corrected_pan = pan_hr;
        return result;
    }

    PanCorrectionResult adjusted = adjust_pan(pan_hr, ms_lr, config.adjustment, config.filter, w0);

    SpectralWeights weights;
    switch (config.weight_source) {
    case WeightSource::provider:
        weights = w0;
        break;
    case WeightSource::estimated_low:
        weights = config.adjustment.pc
                      ? adjusted.weights
                      : estimate_weights(ms_lr, pan_to_low(adjusted.corrected_pan, config.filter));
        break;
    case WeightSource::estimated_high:
        weights = estimate_weights(ms_up, adjusted.corrected_pan);
        break;
    }

    double epsilon = 0.0;
    if (config.epsilon) {
        epsilon = *config.epsilon;
    } else {
        const auto [lo, hi] = value_range(pan_hr);
        epsilon = hi > lo ? 1e-6 * (hi - lo) : 1e-6;
    }
    report.epsilon = epsilon;

    const bool multiplicative =
        config.method == FusionMethod::cs_m || config.method == FusionMethod::hpf_m;
    const Injection variant = !multiplicative                ? Injection::additive
                              : config.literal_ratio_form ? Injection::additive_ratio
                                                          : Injection::multiplicative;

    const Raster& pan = adjusted.corrected_pan;
    if (config.method == FusionMethod::cs_a || config.method == FusionMethod::cs_m) {
        result.fused = fuse_cs(ms_up, pan, intensity(ms_up, weights), variant, epsilon);
    } else {
        result.fused = fuse_hpf(ms_up, pan, lowpass(pan, config.filter), variant, epsilon);
    }

    if (config.mhm) {
        result.fused = match_ms_after_fusion(result.fused, ms_lr, config.adjustment.bins);
    }

    report.fusion_weights = weights;
    report.correction_weights = adjusted.weights;
    report.pan_low_rmse =
        rmse_band(intensity(ms_lr, adjusted.weights), pan_to_low(pan, config.filter));
    result.corrected_pan = std::move(adjusted.corrected_pan);
    return result;
}

void evaluate_workflow(WorkflowResult& result, const MultibandImage& reference) {
    RmseReport rmse = rmse_image(result.fused, reference);
    rmse.pan_rmse =
        rmse_band(intensity(reference, result.report.correction_weights), result.corrected_pan);
    result.report.rmse = std::move(rmse);
}

} // namespace pansharp

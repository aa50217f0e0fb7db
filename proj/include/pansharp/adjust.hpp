#pragma once

#include "pansharp/bvls.hpp"
#include "pansharp/raster.hpp"
#include "pansharp/resample.hpp"

#include <string>

namespace pansharp {

inline constexpr int kDefaultHistogramBins = 65536;

enum class HistogramMatching { none, full, simple };
enum class MatchScale { low, high };

/// Which Pan corrections run before fusion. PHM (histogram matching of the Pan
/// image toward an intensity image) runs first, the model-based correction second.
struct AdjustmentMode {
    HistogramMatching phm = HistogramMatching::none;
    MatchScale phm_scale = MatchScale::low;
    bool pc = false;
    int bins = kDefaultHistogramBins;

    /// Row label in the style "PHM, full, low + PC" / "Before correction".
    std::string label() const;

    friend bool operator==(const AdjustmentMode&, const AdjustmentMode&) = default;
};

struct PanCorrectionResult {
    Raster corrected_pan;   // Pan after every enabled step
    SpectralWeights weights; // estimated weights when pc, else the provider weights
    Raster virtual_low;     // zero when pc is off
    Raster virtual_high;    // zero when pc is off
};

/// First-order statistics matching: (src - mean_src) * (std_tgt / std_src) + mean_tgt.
Raster match_histogram_simple(const Raster& src, const Raster& target);

/// Cumulative-histogram matching. Each src value goes to the target quantile at its
/// own CDF level (mid-rank for ties). The target histogram is binned over the joint
/// value range with linear interpolation inside bins. The mapping is monotone
/// non-decreasing.
Raster match_histogram_full(const Raster& src, const Raster& target,
                            int bins = kDefaultHistogramBins);

/// Bounded least-squares fit of pan_lr by the MS bands with 0 <= w_k <= 1.
BoundedLsqSolution estimate_weights_solution(const MultibandImage& ms, const Raster& pan);
SpectralWeights estimate_weights(const MultibandImage& ms_lr, const Raster& pan_lr);

/// V_lr = P_lr - sum_k w_k S_lr,k.
Raster compute_virtual_band(const Raster& pan_lr, const MultibandImage& ms_lr,
                            const SpectralWeights& w);

struct CorrectedPan {
    Raster corrected;
    Raster virtual_high;
};

/// Upsamples the virtual band to the Pan grid and subtracts it.
CorrectedPan correct_pan(const Raster& pan_hr, const Raster& v_lr, int ratio);

/// PHM (optional) followed by PC (optional). `w0` is used only to build the PHM
/// target intensity and as the reported weights when PC is off.
PanCorrectionResult adjust_pan(const Raster& pan_hr, const MultibandImage& ms_lr,
                               const AdjustmentMode& mode, const FilterSpec& spec,
                               const SpectralWeights& w0);

} // namespace pansharp

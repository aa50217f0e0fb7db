#include "pansharp/adjust.hpp"

#include "pansharp/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pansharp {

std::string AdjustmentMode::label() const {
    std::string out;
    if (phm != HistogramMatching::none) {
        out = std::string("PHM, ") + (phm == HistogramMatching::full ? "full" : "simple") + ", " +
              (phm_scale == MatchScale::low ? "low" : "high");
    }
    if (pc) {
        out += out.empty() ? "PC" : " + PC";
    }
    return out.empty() ? "Before correction" : out;
}

Raster match_histogram_simple(const Raster& src, const Raster& target) {
    const auto s = stats(src);
    const auto t = stats(target);
    if (!(s.std > 0.0)) {
        throw InvalidArgument("match_histogram_simple: source has zero standard deviation");
    }
    const double gain = t.std / s.std;
    Raster out(src.width(), src.height());
    auto in = src.samples();
    auto dst = out.samples();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = (in[i] - s.mean) * gain + t.mean;
    return out;
}

Raster match_histogram_full(const Raster& src, const Raster& target, int bins) {
    if (bins < 2) {
        throw InvalidArgument("match_histogram_full: bins must be >= 2, got " +
                              std::to_string(bins));
    }
    const auto [src_lo, src_hi] = value_range(src);
    const auto [tgt_lo, tgt_hi] = value_range(target);
    if (tgt_lo == tgt_hi) {
        return Raster(src.width(), src.height(), tgt_lo);
    }
    const double lo = std::min(src_lo, tgt_lo);
    const double hi = std::max(src_hi, tgt_hi);
    const double step = (hi - lo) / bins;
    const auto nbins = static_cast<std::size_t>(bins);

    std::vector<double> tgt_count(nbins, 0.0);
    for (double v : target.samples()) {
        const double pos = std::floor((v - lo) / step);
        tgt_count[static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(nbins - 1)))] += 1.0;
    }
    std::vector<double> tgt_cum(nbins);
    double acc = 0.0;
    for (std::size_t b = 0; b < nbins; ++b) tgt_cum[b] = acc += tgt_count[b];
    std::size_t last_nonempty = nbins - 1;
    while (tgt_count[last_nonempty] == 0.0) --last_nonempty;

    // Target value at a (fractional) rank, linear inside each bin.
    auto quantile = [&](double rank) {
        std::size_t j = static_cast<std::size_t>(
            std::upper_bound(tgt_cum.begin(), tgt_cum.end(), rank) - tgt_cum.begin());
        double frac = 1.0;
        if (j >= nbins) {
            j = last_nonempty;
        } else {
            const double below = j == 0 ? 0.0 : tgt_cum[j - 1];
            frac = std::clamp((rank - below) / tgt_count[j], 0.0, 1.0);
        }
        return lo + (static_cast<double>(j) + frac) * step;
    };

    // Source CDF levels from exact ranks; tied values share their mid-rank.
    auto in = src.samples();
    std::vector<std::size_t> order(in.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return in[a] < in[b]; });

    const double scale = static_cast<double>(target.size()) / static_cast<double>(src.size());
    Raster out(src.width(), src.height());
    auto dst = out.samples();
    for (std::size_t start = 0; start < order.size();) {
        std::size_t end = start + 1;
        while (end < order.size() && in[order[end]] == in[order[start]]) ++end;
        const double value = quantile(0.5 * static_cast<double>(start + end) * scale);
        for (std::size_t i = start; i < end; ++i) dst[order[i]] = value;
        start = end;
    }
    return out;
}

BoundedLsqSolution estimate_weights_solution(const MultibandImage& ms, const Raster& pan) {
    if (ms.width() != pan.width() || ms.height() != pan.height()) {
        throw DimensionError("estimate_weights: Pan and MS grids differ");
    }
    const auto pixels = static_cast<Eigen::Index>(pan.size());
    const auto k = static_cast<Eigen::Index>(ms.band_count());
    BoundedLsqProblem problem;
    problem.design.resize(pixels, k);
    for (Eigen::Index b = 0; b < k; ++b) {
        problem.design.col(b) = Eigen::Map<const Eigen::VectorXd>(
            ms.band(static_cast<std::size_t>(b)).samples().data(), pixels);
    }
    problem.target = Eigen::Map<const Eigen::VectorXd>(pan.samples().data(), pixels);
    problem.lower = Eigen::VectorXd::Zero(k);
    problem.upper = Eigen::VectorXd::Ones(k);
    return bvls_solve(problem);
}

SpectralWeights estimate_weights(const MultibandImage& ms_lr, const Raster& pan_lr) {
    const auto solution = estimate_weights_solution(ms_lr, pan_lr);
    return SpectralWeights(
        std::vector<double>(solution.weights.data(), solution.weights.data() + solution.weights.size()));
}

Raster compute_virtual_band(const Raster& pan_lr, const MultibandImage& ms_lr,
                            const SpectralWeights& w) {
    if (ms_lr.width() != pan_lr.width() || ms_lr.height() != pan_lr.height()) {
        throw DimensionError("compute_virtual_band: Pan and MS grids differ");
    }
    return pixelwise_combine(pan_lr, intensity(ms_lr, w), CombineOp::subtract);
}

CorrectedPan correct_pan(const Raster& pan_hr, const Raster& v_lr, int ratio) {
    if (ratio < 1 || v_lr.width() * static_cast<std::size_t>(ratio) != pan_hr.width() ||
        v_lr.height() * static_cast<std::size_t>(ratio) != pan_hr.height()) {
        throw DimensionError("correct_pan: Pan " + std::to_string(pan_hr.width()) + "x" +
                             std::to_string(pan_hr.height()) + " is not the virtual band " +
                             std::to_string(v_lr.width()) + "x" + std::to_string(v_lr.height()) +
                             " times ratio " + std::to_string(ratio));
    }
    CorrectedPan out;
    out.virtual_high = upsample_bicubic(v_lr, ratio);
    out.corrected = pixelwise_combine(pan_hr, out.virtual_high, CombineOp::subtract);
    return out;
}

PanCorrectionResult adjust_pan(const Raster& pan_hr, const MultibandImage& ms_lr,
                               const AdjustmentMode& mode, const FilterSpec& spec,
                               const SpectralWeights& w0) {
    spec.validate();
    const auto ratio = static_cast<std::size_t>(spec.ratio);
    if (ms_lr.width() * ratio != pan_hr.width() || ms_lr.height() * ratio != pan_hr.height()) {
        throw DimensionError("adjust_pan: Pan grid is not the MS grid times ratio " +
                             std::to_string(spec.ratio));
    }
    if (w0.size() != ms_lr.band_count()) {
        throw DimensionError("adjust_pan: provider weights have length " +
                             std::to_string(w0.size()) + ", expected " +
                             std::to_string(ms_lr.band_count()));
    }

    Raster pan = pan_hr;
    if (mode.phm != HistogramMatching::none) {
        const Raster target = mode.phm_scale == MatchScale::low
                                  ? intensity(ms_lr, w0)
                                  : intensity(upsample_bicubic(ms_lr, spec.ratio), w0);
        pan = mode.phm == HistogramMatching::full ? match_histogram_full(pan, target, mode.bins)
                                                  : match_histogram_simple(pan, target);
    }

    if (!mode.pc) {
        return {std::move(pan), w0, Raster(ms_lr.width(), ms_lr.height()),
                Raster(pan_hr.width(), pan_hr.height())};
    }

    const Raster pan_lr = pan_to_low(pan, spec);
    SpectralWeights w = estimate_weights(ms_lr, pan_lr);
    Raster v_lr = compute_virtual_band(pan_lr, ms_lr, w);
    auto corrected = correct_pan(pan, v_lr, spec.ratio);
    return {std::move(corrected.corrected), std::move(w), std::move(v_lr),
            std::move(corrected.virtual_high)};
}

} // namespace pansharp

#pragma once

#include "pansharp/raster.hpp"

#include <functional>

namespace pansharp {

enum class FilterKind { butterworth, boxcar };

/// Low-pass filter parameters together with the resolution change it serves.
struct FilterSpec {
    FilterKind kind = FilterKind::butterworth;
    double cutoff = 0.25; // cycles per sample, in (0, 0.5]
    int order = 5;        // butterworth only
    int ratio = 2;

    /// Butterworth of order 5 with its -3 dB point on the Nyquist frequency of the
    /// coarser grid (cutoff 0.5 / ratio).
    static FilterSpec for_ratio(int ratio, int order = 5);

    void validate() const;
};

/// |H(f)| = 1 / sqrt(1 + (f / cutoff)^(2 order)).
double butterworth_gain(double radial_frequency, double cutoff, int order);

/// Cubic convolution kernel with a = -0.5.
double cubic_kernel(double t);

/// Enlarges by an integer factor. Output pixel (ratio*x, ratio*y) coincides with
/// input pixel (x, y); borders are clamp-replicated.
Raster upsample_bicubic(const Raster& r, int ratio);

/// Zero-phase filtering of the raster. Butterworth runs in the Fourier domain
/// after mirror padding by 4*ratio pixels; boxcar averages ratio x ratio blocks.
Raster lowpass(const Raster& r, const FilterSpec& spec);

/// Applies a real, radially symmetric frequency response. `pad` mirror-pads each
/// side before the transform; pad = 0 filters the raster as a periodic signal.
Raster fourier_filter(const Raster& r, const std::function<double(double)>& response,
                      std::size_t pad);

/// Keeps samples at (ratio*x, ratio*y).
Raster decimate(const Raster& r, int ratio);

/// lowpass then decimate: the Pan image brought onto the MS grid.
Raster pan_to_low(const Raster& pan_hr, const FilterSpec& spec);

MultibandImage upsample_bicubic(const MultibandImage& ms, int ratio);
MultibandImage pan_to_low(const MultibandImage& ms, const FilterSpec& spec);

struct WaldPair {
    MultibandImage ms_lr;
    Raster pan_lr;
};

/// Reduced-resolution inputs: every MS band and the Pan image are filtered and
/// decimated by their own spec.
WaldPair degrade_wald(const MultibandImage& ms, const Raster& pan, const FilterSpec& spec_ms,
                      const FilterSpec& spec_pan);

} // namespace pansharp

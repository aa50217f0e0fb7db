#pragma once

#include "pansharp/raster.hpp"

#include <cstdint>
#include <vector>

namespace pansharp {

/// Sensor weights published for the 8-band WorldView-2 Pan response.
inline const std::vector<double> kWorldView2ProviderWeights = {
    0.0074, 0.1106, 0.1787, 0.12076, 0.1987, 0.1363, 0.0959, 0.0002793};

/// Knobs of the synthetic two-sensor scene. The scene is generated on the fine
/// (Pan) grid; MS bands are that radiance seen through a coarser sensor.
struct SynthParams {
    std::size_t ms_size = 128; // MS grid edge length
    int pan_ratio = 4;         // Pan grid = ms_size * pan_ratio
    std::vector<double> provider_weights = kWorldView2ProviderWeights;
    std::vector<double> band_means = {220, 260, 300, 280, 320, 300, 420, 380};

    /// Log-radiance texture: common field with correlation `band_correlation` to
    /// each band's own field, standard deviation `texture_amplitude`.
    double texture_amplitude = 0.25;
    double band_correlation = 0.9;
    double spectrum_corner = 0.01; // cycles per fine sample
    double spectrum_slope = 2.2;   // power-law exponent of the power spectrum

    /// Pan radiance = gain * sum_k w_k S_k + virtual band; w_k are the provider
    /// weights perturbed by up to +-weight_jitter (relative).
    double pan_gain = 1.3;
    double weight_jitter = 0.3;
    double virtual_offset = 60.0;
    double virtual_smooth_amplitude = 25.0;
    double virtual_smooth_scale = 0.004; // cycles per fine sample
    double virtual_texture_amplitude = 6.0;
    double virtual_texture_corner = 0.01; // spectrum corner of the virtual-band texture
    double pan_noise = 2.0;
};

struct SynthScene {
    MultibandImage ms; // ms_size^2 per band
    Raster pan;        // (ms_size * pan_ratio)^2
    std::vector<double> provider_weights;
    std::vector<double> true_weights; // effective Pan weights (gain included)
};

SynthScene make_synthetic_scene(std::uint64_t seed, const SynthParams& params = {});

/// Zero-mean, unit-variance Gaussian random field with power spectrum
/// (1 + (f / corner)^2)^(-slope / 2), band-limited below 0.45 cycles/sample.
Raster random_field(std::size_t size, std::uint64_t seed, double corner, double slope);

/// Smooth zero-mean unit-variance field with a Gaussian spectrum of width `scale`.
Raster smooth_field(std::size_t size, std::uint64_t seed, double scale);

} // namespace pansharp

#include "pansharp/synth.hpp"

#include "pansharp/error.hpp"
#include "pansharp/resample.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace pansharp {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Raster white_noise(std::size_t size, std::uint64_t seed) {
    std::mt19937_64 rng(splitmix64(seed));
    std::normal_distribution<double> normal(0.0, 1.0);
    Raster r(size, size);
    for (double& v : r.samples()) v = normal(rng);
    return r;
}

void standardize(Raster& r) {
    const auto s = stats(r);
    const double inv = s.std > 0.0 ? 1.0 / s.std : 0.0;
    for (double& v : r.samples()) v = (v - s.mean) * inv;
}

} // namespace

Raster random_field(std::size_t size, std::uint64_t seed, double corner, double slope) {
    Raster field = fourier_filter(
        white_noise(size, seed),
        [corner, slope](double f) {
            if (f >= 0.45) return 0.0;
            return std::pow(1.0 + (f / corner) * (f / corner), -slope / 4.0);
        },
        0);
    standardize(field);
    return field;
}

Raster smooth_field(std::size_t size, std::uint64_t seed, double scale) {
    Raster field = fourier_filter(
        white_noise(size, seed),
        [scale](double f) { return f == 0.0 ? 0.0 : std::exp(-(f / scale) * (f / scale)); }, 0);
    standardize(field);
    return field;
}

SynthScene make_synthetic_scene(std::uint64_t seed, const SynthParams& p) {
    const std::size_t bands = p.provider_weights.size();
    if (bands == 0 || p.band_means.size() != bands) {
        throw InvalidArgument("synth: band_means and provider_weights must have equal, non-zero length");
    }
    if (p.ms_size == 0 || p.pan_ratio < 1) {
        throw InvalidArgument("synth: ms_size and pan_ratio must be positive");
    }
    const std::size_t fine = p.ms_size * static_cast<std::size_t>(p.pan_ratio);
    const std::uint64_t base = splitmix64(seed);
    std::uint64_t stream = 0;
    auto next_seed = [&] { return base ^ splitmix64(++stream); };

    std::mt19937_64 rng(next_seed());
    std::uniform_real_distribution<double> jitter(-p.weight_jitter, p.weight_jitter);

    SynthScene scene;
    scene.provider_weights = p.provider_weights;
    for (std::size_t k = 0; k < bands; ++k) {
        const double w = p.pan_gain * p.provider_weights[k] * (1.0 + jitter(rng));
        scene.true_weights.push_back(std::clamp(w, 0.0, 1.0));
    }

    const Raster common = random_field(fine, next_seed(), p.spectrum_corner, p.spectrum_slope);
    const double rho = p.band_correlation;
    const double own = std::sqrt(std::max(0.0, 1.0 - rho * rho));

    Raster pan_fine(fine, fine);
    std::vector<Raster> ms_bands;
    const FilterSpec ms_sensor = FilterSpec::for_ratio(p.pan_ratio);
    for (std::size_t k = 0; k < bands; ++k) {
        const Raster specific = random_field(fine, next_seed(), p.spectrum_corner, p.spectrum_slope);
        Raster band(fine, fine);
        for (std::size_t i = 0; i < band.size(); ++i) {
            band[i] = p.band_means[k] *
                      std::exp(p.texture_amplitude * (rho * common[i] + own * specific[i]));
            pan_fine[i] += scene.true_weights[k] * band[i];
        }
        ms_bands.push_back(pan_to_low(band, ms_sensor));
    }
    scene.ms = MultibandImage(std::move(ms_bands));

    const Raster smooth = smooth_field(fine, next_seed(), p.virtual_smooth_scale);
    const Raster texture = random_field(fine, next_seed(), p.virtual_texture_corner, p.spectrum_slope);
    std::mt19937_64 noise_rng(next_seed());
    std::normal_distribution<double> noise(0.0, p.pan_noise);
    for (std::size_t i = 0; i < pan_fine.size(); ++i) {
        pan_fine[i] += p.virtual_offset + p.virtual_smooth_amplitude * smooth[i] +
                       p.virtual_texture_amplitude * texture[i] + noise(noise_rng);
    }
    scene.pan = std::move(pan_fine);
    return scene;
}

} // namespace pansharp

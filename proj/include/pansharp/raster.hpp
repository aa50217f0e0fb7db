#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace pansharp {

/// Single-band image. Samples are row-major with the origin at the top-left,
/// so pixel (x, y) lives at index y * width + x.
class Raster {
public:
    Raster() = default;
    Raster(std::size_t width, std::size_t height, double fill = 0.0);
    Raster(std::size_t width, std::size_t height, std::vector<double> samples);

    std::size_t width() const { return width_; }
    std::size_t height() const { return height_; }
    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }

    double operator()(std::size_t x, std::size_t y) const { return samples_[y * width_ + x]; }
    double& operator()(std::size_t x, std::size_t y) { return samples_[y * width_ + x]; }
    double operator[](std::size_t i) const { return samples_[i]; }
    double& operator[](std::size_t i) { return samples_[i]; }

    std::span<const double> samples() const { return samples_; }
    std::span<double> samples() { return samples_; }

    bool same_shape(const Raster& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

    /// Throws InvalidArgument if any sample is NaN or infinite.
    void require_finite(const char* what) const;

    friend bool operator==(const Raster&, const Raster&) = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<double> samples_;
};

/// K co-registered bands of identical size.
class MultibandImage {
public:
    MultibandImage() = default;
    explicit MultibandImage(std::vector<Raster> bands);

    std::size_t band_count() const { return bands_.size(); }
    std::size_t width() const { return bands_.empty() ? 0 : bands_.front().width(); }
    std::size_t height() const { return bands_.empty() ? 0 : bands_.front().height(); }
    std::size_t pixel_count() const { return width() * height(); }

    const Raster& band(std::size_t k) const { return bands_.at(k); }
    Raster& band(std::size_t k) { return bands_.at(k); }
    const std::vector<Raster>& bands() const { return bands_; }

    friend bool operator==(const MultibandImage&, const MultibandImage&) = default;

private:
    std::vector<Raster> bands_;
};

/// Per-band weights, each in [0, 1].
class SpectralWeights {
public:
    SpectralWeights() = default;
    explicit SpectralWeights(std::vector<double> values);

    static SpectralWeights uniform(std::size_t bands);

    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t k) const { return values_[k]; }
    const std::vector<double>& values() const { return values_; }

    friend bool operator==(const SpectralWeights&, const SpectralWeights&) = default;

private:
    std::vector<double> values_;
};

enum class CombineOp { add, subtract, multiply, safe_divide };

/// Weighted band sum: out[i] = sum_k w[k] * ms.band(k)[i].
Raster intensity(const MultibandImage& ms, const SpectralWeights& w);

/// Elementwise a (op) b. safe_divide computes a / max(b, epsilon).
Raster pixelwise_combine(const Raster& a, const Raster& b, CombineOp op, double epsilon = 0.0);

struct RasterStats {
    double mean = 0.0;
    double std = 0.0; // population (divisor N)
};

RasterStats stats(const Raster& r);

/// Smallest and largest sample.
std::pair<double, double> value_range(const Raster& r);

void require_same_shape(const Raster& a, const Raster& b, const char* what);

} // namespace pansharp

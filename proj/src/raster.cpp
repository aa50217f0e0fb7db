#include "pansharp/raster.hpp"

#include "pansharp/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pansharp {

Raster::Raster(std::size_t width, std::size_t height, double fill)
    : width_(width), height_(height), samples_(width * height, fill) {
    if (width == 0 || height == 0) {
        throw DimensionError("raster dimensions must be positive");
    }
}

Raster::Raster(std::size_t width, std::size_t height, std::vector<double> samples)
    : width_(width), height_(height), samples_(std::move(samples)) {
    if (width == 0 || height == 0) {
        throw DimensionError("raster dimensions must be positive");
    }
    if (samples_.size() != width * height) {
        throw DimensionError("raster sample count " + std::to_string(samples_.size()) +
                             " does not match " + std::to_string(width) + "x" +
                             std::to_string(height));
    }
}

void Raster::require_finite(const char* what) const {
    for (double v : samples_) {
        if (!std::isfinite(v)) {
            throw InvalidArgument(std::string(what) + ": raster contains a non-finite sample");
        }
    }
}

MultibandImage::MultibandImage(std::vector<Raster> bands) : bands_(std::move(bands)) {
    if (bands_.empty()) {
        throw DimensionError("multiband image needs at least one band");
    }
    for (const auto& b : bands_) {
        if (!b.same_shape(bands_.front())) {
            throw DimensionError("all bands of a multiband image must share dimensions");
        }
    }
}

SpectralWeights::SpectralWeights(std::vector<double> values) : values_(std::move(values)) {
    for (double v : values_) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw InvalidArgument("spectral weight " + std::to_string(v) + " outside [0, 1]");
        }
    }
}

SpectralWeights SpectralWeights::uniform(std::size_t bands) {
    if (bands == 0) {
        throw InvalidArgument("uniform weights need at least one band");
    }
    return SpectralWeights(std::vector<double>(bands, 1.0 / static_cast<double>(bands)));
}

void require_same_shape(const Raster& a, const Raster& b, const char* what) {
    if (!a.same_shape(b)) {
        throw DimensionError(std::string(what) + ": dimension mismatch (" +
                             std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                             " vs " + std::to_string(b.width()) + "x" +
                             std::to_string(b.height()) + ")");
    }
}

Raster intensity(const MultibandImage& ms, const SpectralWeights& w) {
    if (w.size() != ms.band_count()) {
        throw DimensionError("intensity: weight length " + std::to_string(w.size()) +
                             " does not match band count " + std::to_string(ms.band_count()));
    }
    Raster out(ms.width(), ms.height());
    auto dst = out.samples();
    for (std::size_t k = 0; k < ms.band_count(); ++k) {
        const double wk = w[k];
        auto src = ms.band(k).samples();
        for (std::size_t i = 0; i < dst.size(); ++i) {
            dst[i] += wk * src[i];
        }
    }
    return out;
}

Raster pixelwise_combine(const Raster& a, const Raster& b, CombineOp op, double epsilon) {
    require_same_shape(a, b, "pixelwise_combine");
    if (!(epsilon >= 0.0)) {
        throw InvalidArgument("pixelwise_combine: epsilon must be non-negative");
    }
    Raster out(a.width(), a.height());
    auto pa = a.samples();
    auto pb = b.samples();
    auto dst = out.samples();
    switch (op) {
    case CombineOp::add:
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = pa[i] + pb[i];
        break;
    case CombineOp::subtract:
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = pa[i] - pb[i];
        break;
    case CombineOp::multiply:
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = pa[i] * pb[i];
        break;
    case CombineOp::safe_divide:
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = pa[i] / std::max(pb[i], epsilon);
        break;
    }
    return out;
}

RasterStats stats(const Raster& r) {
    if (r.empty()) {
        throw InvalidArgument("stats: empty raster");
    }
    // Welford update
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t n = 0;
    for (double v : r.samples()) {
        ++n;
        const double delta = v - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (v - mean);
    }
    return {mean, std::sqrt(std::max(m2, 0.0) / static_cast<double>(n))};
}

std::pair<double, double> value_range(const Raster& r) {
    if (r.empty()) {
        throw InvalidArgument("value_range: empty raster");
    }
    auto [lo, hi] = std::minmax_element(r.samples().begin(), r.samples().end());
    return {*lo, *hi};
}

} // namespace pansharp

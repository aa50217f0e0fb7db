#include "pansharp/quality.hpp"

#include "pansharp/error.hpp"

#include <cmath>
#include <string>

namespace pansharp {

double rmse_band(const Raster& a, const Raster& b) {
    require_same_shape(a, b, "rmse_band");
    auto pa = a.samples();
    auto pb = b.samples();
    double sum = 0.0;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        const double d = pa[i] - pb[i];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(pa.size()));
}

RmseReport rmse_image(const MultibandImage& a, const MultibandImage& b) {
    if (a.band_count() != b.band_count()) {
        throw DimensionError("rmse_image: band counts differ (" + std::to_string(a.band_count()) +
                             " vs " + std::to_string(b.band_count()) + ")");
    }
    RmseReport report;
    report.per_band.reserve(a.band_count());
    double total = 0.0;
    for (std::size_t k = 0; k < a.band_count(); ++k) {
        report.per_band.push_back(rmse_band(a.band(k), b.band(k)));
        total += report.per_band.back();
    }
    report.mean = total / static_cast<double>(a.band_count());
    return report;
}

} // namespace pansharp

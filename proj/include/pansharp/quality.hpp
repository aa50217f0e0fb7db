#pragma once

#include "pansharp/raster.hpp"

#include <optional>
#include <vector>

namespace pansharp {

struct RmseReport {
    std::vector<double> per_band;
    double mean = 0.0;
    std::optional<double> pan_rmse;
};

/// sqrt(mean((a - b)^2)) over all pixels.
double rmse_band(const Raster& a, const Raster& b);

/// Per-band RMSE and their arithmetic mean.
RmseReport rmse_image(const MultibandImage& a, const MultibandImage& b);

} // namespace pansharp

#pragma once

#include "pansharp/raster.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace testutil {

inline pansharp::Raster random_raster(std::size_t w, std::size_t h, std::mt19937_64& rng,
                                      double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    pansharp::Raster r(w, h);
    for (double& v : r.samples()) v = u(rng);
    return r;
}

inline pansharp::MultibandImage random_image(std::size_t w, std::size_t h, std::size_t k,
                                             std::mt19937_64& rng, double lo = 0.0,
                                             double hi = 1.0) {
    std::vector<pansharp::Raster> bands;
    for (std::size_t i = 0; i < k; ++i) bands.push_back(random_raster(w, h, rng, lo, hi));
    return pansharp::MultibandImage(std::move(bands));
}

inline double max_abs_diff(const pansharp::Raster& a, const pansharp::Raster& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

/// Band-limited smooth test pattern: a few low-frequency cosines.
inline pansharp::Raster smooth_pattern(std::size_t w, std::size_t h, double base = 100.0) {
    pansharp::Raster r(w, h);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const double fx = static_cast<double>(x) / static_cast<double>(w);
            const double fy = static_cast<double>(y) / static_cast<double>(h);
            r(x, y) = base + 10.0 * std::cos(2 * M_PI * 2 * fx) + 6.0 * std::sin(2 * M_PI * 3 * fy) +
                      4.0 * std::cos(2 * M_PI * (fx + 2 * fy));
        }
    }
    return r;
}

} // namespace testutil

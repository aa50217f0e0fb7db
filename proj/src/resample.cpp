#include "pansharp/resample.hpp"

#include "pansharp/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <mutex>
#include <string>

namespace pansharp {

namespace {

// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwBuffer {
    explicit FftwBuffer(std::size_t bytes) : ptr(fftw_malloc(bytes)) {
        if (!ptr) throw Error("fftw_malloc failed");
    }
    ~FftwBuffer() { fftw_free(ptr); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    void* ptr;
};

struct FftwPlan {
    explicit FftwPlan(fftw_plan p) : plan(p) {
        if (!plan) throw Error("fftw plan creation failed");
    }
    ~FftwPlan() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    FftwPlan(const FftwPlan&) = delete;
    FftwPlan& operator=(const FftwPlan&) = delete;
    fftw_plan plan;
};

// Whole-sample symmetric reflection: ... 2 1 | 0 1 2 ... n-1 | n-2 ...
std::size_t mirror_index(std::ptrdiff_t i, std::size_t n) {
    if (n == 1) return 0;
    const auto period = static_cast<std::ptrdiff_t>(2 * (n - 1));
    std::ptrdiff_t m = i % period;
    if (m < 0) m += period;
    if (m >= static_cast<std::ptrdiff_t>(n)) m = period - m;
    return static_cast<std::size_t>(m);
}

std::size_t clamp_index(std::ptrdiff_t i, std::size_t n) {
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(n) - 1));
}

void require_ratio(int ratio, const char* what) {
    if (ratio < 1) {
        throw InvalidArgument(std::string(what) + ": ratio must be >= 1, got " +
                              std::to_string(ratio));
    }
}

struct Taps {
    std::array<std::size_t, 4> index{};
    std::array<double, 4> weight{};
};

std::vector<Taps> cubic_taps(std::size_t in_len, int ratio) {
    const std::size_t out_len = in_len * static_cast<std::size_t>(ratio);
    std::vector<Taps> taps(out_len);
    for (std::size_t o = 0; o < out_len; ++o) {
        const auto base = static_cast<std::ptrdiff_t>(o / static_cast<std::size_t>(ratio));
        const double t = static_cast<double>(o % static_cast<std::size_t>(ratio)) / ratio;
        for (int j = 0; j < 4; ++j) {
            const std::ptrdiff_t src = base - 1 + j;
            taps[o].index[static_cast<std::size_t>(j)] = clamp_index(src, in_len);
            taps[o].weight[static_cast<std::size_t>(j)] = cubic_kernel(t - (j - 1));
        }
    }
    return taps;
}

Raster boxcar(const Raster& r, int ratio) {
    const auto block = static_cast<std::size_t>(ratio);
    Raster out(r.width(), r.height());
    for (std::size_t by = 0; by < r.height(); by += block) {
        const std::size_t ey = std::min(by + block, r.height());
        for (std::size_t bx = 0; bx < r.width(); bx += block) {
            const std::size_t ex = std::min(bx + block, r.width());
            double sum = 0.0;
            for (std::size_t y = by; y < ey; ++y)
                for (std::size_t x = bx; x < ex; ++x) sum += r(x, y);
            const double mean = sum / static_cast<double>((ey - by) * (ex - bx));
            for (std::size_t y = by; y < ey; ++y)
                for (std::size_t x = bx; x < ex; ++x) out(x, y) = mean;
        }
    }
    return out;
}

} // namespace

FilterSpec FilterSpec::for_ratio(int ratio, int order) {
    require_ratio(ratio, "FilterSpec");
    FilterSpec spec;
    spec.kind = FilterKind::butterworth;
    spec.cutoff = 0.5 / ratio;
    spec.order = order;
    spec.ratio = ratio;
    return spec;
}

void FilterSpec::validate() const {
    require_ratio(ratio, "FilterSpec");
    if (!(cutoff > 0.0 && cutoff <= 0.5)) {
        throw InvalidArgument("FilterSpec: cutoff must lie in (0, 0.5], got " +
                              std::to_string(cutoff));
    }
    if (kind == FilterKind::butterworth && order < 1) {
        throw InvalidArgument("FilterSpec: butterworth order must be positive");
    }
}

double butterworth_gain(double radial_frequency, double cutoff, int order) {
    return 1.0 / std::sqrt(1.0 + std::pow(radial_frequency / cutoff, 2.0 * order));
}

double cubic_kernel(double t) {
    constexpr double a = -0.5;
    const double x = std::abs(t);
    if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
    if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
    return 0.0;
}

Raster upsample_bicubic(const Raster& r, int ratio) {
    require_ratio(ratio, "upsample_bicubic");
    if (ratio == 1) return r;
    const auto ur = static_cast<std::size_t>(ratio);
    const std::size_t out_w = r.width() * ur;
    const std::size_t out_h = r.height() * ur;
    const auto col_taps = cubic_taps(r.width(), ratio);
    const auto row_taps = cubic_taps(r.height(), ratio);

    Raster horizontal(out_w, r.height());
    for (std::size_t y = 0; y < r.height(); ++y) {
        for (std::size_t x = 0; x < out_w; ++x) {
            const auto& t = col_taps[x];
            double v = 0.0;
            for (std::size_t j = 0; j < 4; ++j) v += t.weight[j] * r(t.index[j], y);
            horizontal(x, y) = v;
        }
    }
    Raster out(out_w, out_h);
    for (std::size_t y = 0; y < out_h; ++y) {
        const auto& t = row_taps[y];
        for (std::size_t x = 0; x < out_w; ++x) {
            double v = 0.0;
            for (std::size_t j = 0; j < 4; ++j) v += t.weight[j] * horizontal(x, t.index[j]);
            out(x, y) = v;
        }
    }
    return out;
}

Raster fourier_filter(const Raster& r, const std::function<double(double)>& response,
                      std::size_t pad) {
    const std::size_t pw = r.width() + 2 * pad;
    const std::size_t ph = r.height() + 2 * pad;
    const std::size_t cw = pw / 2 + 1;

    FftwBuffer real_buf(sizeof(double) * pw * ph);
    FftwBuffer spec_buf(sizeof(fftw_complex) * cw * ph);
    auto* real = static_cast<double*>(real_buf.ptr);
    auto* spectrum = static_cast<fftw_complex*>(spec_buf.ptr);

    std::unique_ptr<FftwPlan> forward;
    std::unique_ptr<FftwPlan> backward;
    {
        std::lock_guard lock(planner_mutex());
        forward = std::make_unique<FftwPlan>(fftw_plan_dft_r2c_2d(
            static_cast<int>(ph), static_cast<int>(pw), real, spectrum, FFTW_ESTIMATE));
        backward = std::make_unique<FftwPlan>(fftw_plan_dft_c2r_2d(
            static_cast<int>(ph), static_cast<int>(pw), spectrum, real, FFTW_ESTIMATE));
    }

    const auto spad = static_cast<std::ptrdiff_t>(pad);
    for (std::size_t y = 0; y < ph; ++y) {
        const std::size_t sy = mirror_index(static_cast<std::ptrdiff_t>(y) - spad, r.height());
        for (std::size_t x = 0; x < pw; ++x) {
            const std::size_t sx = mirror_index(static_cast<std::ptrdiff_t>(x) - spad, r.width());
            real[y * pw + x] = r(sx, sy);
        }
    }

    fftw_execute(forward->plan);

    const double norm = 1.0 / static_cast<double>(pw * ph);
    for (std::size_t ky = 0; ky < ph; ++ky) {
        const double fy = (ky <= ph / 2 ? static_cast<double>(ky)
                                        : static_cast<double>(ky) - static_cast<double>(ph)) /
                          static_cast<double>(ph);
        for (std::size_t kx = 0; kx < cw; ++kx) {
            const double fx = static_cast<double>(kx) / static_cast<double>(pw);
            const double g = response(std::sqrt(fx * fx + fy * fy)) * norm;
            spectrum[ky * cw + kx][0] *= g;
            spectrum[ky * cw + kx][1] *= g;
        }
    }

    fftw_execute(backward->plan);

    Raster out(r.width(), r.height());
    for (std::size_t y = 0; y < r.height(); ++y)
        for (std::size_t x = 0; x < r.width(); ++x) out(x, y) = real[(y + pad) * pw + x + pad];
    return out;
}

Raster lowpass(const Raster& r, const FilterSpec& spec) {
    spec.validate();
    if (spec.kind == FilterKind::boxcar) {
        return boxcar(r, spec.ratio);
    }
    const double cutoff = spec.cutoff;
    const int order = spec.order;
    return fourier_filter(
        r, [cutoff, order](double f) { return butterworth_gain(f, cutoff, order); },
        4 * static_cast<std::size_t>(spec.ratio));
}

Raster decimate(const Raster& r, int ratio) {
    require_ratio(ratio, "decimate");
    const auto ur = static_cast<std::size_t>(ratio);
    if (r.width() % ur != 0 || r.height() % ur != 0) {
        throw DimensionError("decimate: " + std::to_string(r.width()) + "x" +
                             std::to_string(r.height()) + " is not divisible by ratio " +
                             std::to_string(ratio));
    }
    if (ratio == 1) return r;
    Raster out(r.width() / ur, r.height() / ur);
    for (std::size_t y = 0; y < out.height(); ++y)
        for (std::size_t x = 0; x < out.width(); ++x) out(x, y) = r(x * ur, y * ur);
    return out;
}

Raster pan_to_low(const Raster& pan_hr, const FilterSpec& spec) {
    spec.validate();
    const auto ur = static_cast<std::size_t>(spec.ratio);
    if (pan_hr.width() % ur != 0 || pan_hr.height() % ur != 0) {
        throw DimensionError("pan_to_low: " + std::to_string(pan_hr.width()) + "x" +
                             std::to_string(pan_hr.height()) + " is not divisible by ratio " +
                             std::to_string(spec.ratio));
    }
    return decimate(lowpass(pan_hr, spec), spec.ratio);
}

MultibandImage upsample_bicubic(const MultibandImage& ms, int ratio) {
    std::vector<Raster> bands;
    bands.reserve(ms.band_count());
    for (const auto& b : ms.bands()) bands.push_back(upsample_bicubic(b, ratio));
    return MultibandImage(std::move(bands));
}

MultibandImage pan_to_low(const MultibandImage& ms, const FilterSpec& spec) {
    std::vector<Raster> bands;
    bands.reserve(ms.band_count());
    for (const auto& b : ms.bands()) bands.push_back(pan_to_low(b, spec));
    return MultibandImage(std::move(bands));
}

WaldPair degrade_wald(const MultibandImage& ms, const Raster& pan, const FilterSpec& spec_ms,
                      const FilterSpec& spec_pan) {
    WaldPair out{pan_to_low(ms, spec_ms), pan_to_low(pan, spec_pan)};
    // The reduced pair must still nest: Pan grid an integer multiple of the MS grid.
    const auto& lr = out.ms_lr;
    if (out.pan_lr.width() % lr.width() != 0 || out.pan_lr.height() % lr.height() != 0 ||
        out.pan_lr.width() / lr.width() != out.pan_lr.height() / lr.height()) {
        throw DimensionError("degrade_wald: reduced Pan " + std::to_string(out.pan_lr.width()) +
                             "x" + std::to_string(out.pan_lr.height()) +
                             " is not an integer multiple of reduced MS " +
                             std::to_string(lr.width()) + "x" + std::to_string(lr.height()));
    }
    return out;
}

} // namespace pansharp

#pragma once

#include "pansharp/fusion.hpp"
#include "pansharp/synth.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pansharp {

/// Mode tokens used on the command line and in experiment files:
/// "before", "pc", "phm-full-low", "phm-simple-high+pc", ...
AdjustmentMode parse_adjustment_mode(const std::string& token);
std::string to_token(const AdjustmentMode& mode);

/// The reduced-resolution inputs and their reference.
struct WaldInputs {
    MultibandImage ms_lr;
    Raster pan_hr;
    MultibandImage reference;
    FilterSpec filter; // fusion-scale filter, ratio = pan_hr / ms_lr
};

/// Degrades MS by `ratio` and Pan by its own ratio to the MS grid, so the original
/// MS becomes the reference for a fusion at `ratio`. `cutoff` overrides the
/// fusion-scale cutoff (default 0.5 / ratio).
WaldInputs prepare_wald_inputs(const MultibandImage& ms, const Raster& pan, int ratio,
                               int filter_order = 5, std::optional<double> cutoff = std::nullopt);

struct ExperimentSpec {
    /// Original-resolution imagery; when unset a synthetic scene is generated.
    std::optional<std::string> ms_path;
    std::optional<std::string> pan_path;
    std::optional<std::string> weights_path;

    int ratio = 2;
    int filter_order = 5;
    std::optional<double> cutoff;
    int bins = kDefaultHistogramBins;
    std::optional<double> epsilon;

    std::vector<AdjustmentMode> modes;
    std::vector<WeightSource> weight_sources;
    std::vector<bool> mhm;
    std::vector<FusionMethod> methods;

    std::uint64_t seed = 0;
    int repeats = 1; // synthetic scenes seed, seed+1, ...; RMSE averaged
    SynthParams synth;

    /// Row of the method table broken down per band; default the last grid row.
    std::optional<std::string> per_band_mode;

    /// The full comparison grid: every PHM variant with and without PC, all weight
    /// sources, MHM off/on, all five methods.
    static ExperimentSpec full_grid();

    /// Throws InvalidArgument for an empty or inconsistent grid.
    void validate() const;
};

/// Averaged outcome of one grid combination.
struct RunRecord {
    FusionConfig config;
    WorkflowReport report; // report.rmse holds the seed-averaged values
    std::string error;     // empty on success
};

struct PanCorrectionRecord {
    AdjustmentMode mode;
    double rmse_high = 0.0; // RMSE(I_hr, corrected Pan)
    double rmse_low = 0.0;  // RMSE(I_lr, corrected Pan on the MS grid)
    std::string error;
};

struct ExperimentResult {
    std::size_t bands = 0;
    std::vector<RunRecord> runs;
    std::vector<PanCorrectionRecord> pan_correction;
    std::vector<std::string> warnings;

    bool any_failed() const;

    std::string runs_csv() const;
    std::string pan_correction_csv() const;
    std::string method_comparison_csv() const;
    std::string per_band_csv(const std::optional<std::string>& mode_label) const;
};

/// Runs every grid combination. Rows are computed on up to `threads` workers;
/// the result does not depend on the thread count.
ExperimentResult run_experiment(const ExperimentSpec& spec, unsigned threads = 1);

/// Worker cap from PANSHARP_THREADS, else the hardware concurrency.
unsigned thread_cap_from_env();

} // namespace pansharp

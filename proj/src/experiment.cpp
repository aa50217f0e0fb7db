#include "pansharp/experiment.hpp"

#include "pansharp/error.hpp"
#include "pansharp/io.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <map>
#include <sstream>
#include <thread>

namespace pansharp {

AdjustmentMode parse_adjustment_mode(const std::string& token) {
    AdjustmentMode mode;
    bool seen_before = false;
    bool seen_phm = false;
    std::stringstream ss(token);
    std::string part;
    std::size_t parts = 0;
    if (token.empty() || token.front() == '+' || token.back() == '+' ||
        token.find("++") != std::string::npos) {
        throw InvalidArgument("mode '" + token + "' has an empty component");
    }
    while (std::getline(ss, part, '+')) {
        ++parts;
        if (part == "before" || part == "none") {
            seen_before = true;
        } else if (part == "pc") {
            if (mode.pc) throw InvalidArgument("mode '" + token + "' repeats pc");
            mode.pc = true;
        } else if (part.rfind("phm-", 0) == 0) {
            if (seen_phm) throw InvalidArgument("mode '" + token + "' repeats phm");
            seen_phm = true;
            const auto dash = part.find('-', 4);
            const std::string kind = part.substr(4, dash == std::string::npos ? dash : dash - 4);
            const std::string scale = dash == std::string::npos ? "low" : part.substr(dash + 1);
            if (kind == "full") {
                mode.phm = HistogramMatching::full;
            } else if (kind == "simple") {
                mode.phm = HistogramMatching::simple;
            } else {
                throw InvalidArgument("unknown histogram matching '" + kind + "' in mode '" + token + "'");
            }
            if (scale == "low") {
                mode.phm_scale = MatchScale::low;
            } else if (scale == "high") {
                mode.phm_scale = MatchScale::high;
            } else {
                throw InvalidArgument("unknown matching scale '" + scale + "' in mode '" + token + "'");
            }
        } else {
            throw InvalidArgument("unknown mode component '" + part + "' in '" + token + "'");
        }
    }
    if (parts == 0) throw InvalidArgument("empty mode token");
    if (seen_before && parts > 1) {
        throw InvalidArgument("mode '" + token + "' combines 'before' with corrections");
    }
    return mode;
}

std::string to_token(const AdjustmentMode& mode) {
    std::string out;
    if (mode.phm != HistogramMatching::none) {
        out = std::string("phm-") + (mode.phm == HistogramMatching::full ? "full" : "simple") +
              (mode.phm_scale == MatchScale::low ? "-low" : "-high");
    }
    if (mode.pc) out += out.empty() ? "pc" : "+pc";
    return out.empty() ? "before" : out;
}

WaldInputs prepare_wald_inputs(const MultibandImage& ms, const Raster& pan, int ratio,
                               int filter_order, std::optional<double> cutoff) {
    if (ratio < 1) throw InvalidArgument("ratio must be >= 1");
    if (pan.width() % ms.width() != 0 || pan.height() % ms.height() != 0 ||
        pan.width() / ms.width() != pan.height() / ms.height()) {
        throw DimensionError("Pan " + std::to_string(pan.width()) + "x" +
                             std::to_string(pan.height()) + " is not an integer multiple of MS " +
                             std::to_string(ms.width()) + "x" + std::to_string(ms.height()));
    }
    const int sensor_ratio = static_cast<int>(pan.width() / ms.width());

    FilterSpec fusion = FilterSpec::for_ratio(ratio, filter_order);
    if (cutoff) fusion.cutoff = *cutoff;
    fusion.validate();

    WaldInputs out;
    out.filter = fusion;
    out.reference = ms;
    out.ms_lr = pan_to_low(ms, fusion);
    out.pan_hr = sensor_ratio == 1 ? pan : pan_to_low(pan, FilterSpec::for_ratio(sensor_ratio, filter_order));
    return out;
}

ExperimentSpec ExperimentSpec::full_grid() {
    ExperimentSpec spec;
    spec.modes.push_back(parse_adjustment_mode("before"));
    for (const char* phm : {"phm-full-low", "phm-full-high", "phm-simple-low", "phm-simple-high"}) {
        spec.modes.push_back(parse_adjustment_mode(phm));
    }
    spec.modes.push_back(parse_adjustment_mode("pc"));
    for (const char* phm : {"phm-full-low", "phm-full-high", "phm-simple-low", "phm-simple-high"}) {
        spec.modes.push_back(parse_adjustment_mode(std::string(phm) + "+pc"));
    }
    spec.weight_sources = {WeightSource::provider, WeightSource::estimated_low,
                           WeightSource::estimated_high};
    spec.mhm = {false, true};
    spec.methods = {FusionMethod::msi, FusionMethod::cs_a, FusionMethod::cs_m, FusionMethod::hpf_a,
                    FusionMethod::hpf_m};
    return spec;
}

void ExperimentSpec::validate() const {
    if (modes.empty()) throw InvalidArgument("experiment: mode list is empty");
    if (methods.empty()) throw InvalidArgument("experiment: method list is empty");
    const bool fusing = std::any_of(methods.begin(), methods.end(),
                                    [](FusionMethod m) { return m != FusionMethod::msi; });
    if (fusing && weight_sources.empty()) throw InvalidArgument("experiment: weight-source list is empty");
    if (fusing && mhm.empty()) throw InvalidArgument("experiment: MHM list is empty");
    if (ratio < 1) throw InvalidArgument("experiment: ratio must be >= 1");
    if (repeats < 1) throw InvalidArgument("experiment: repeats must be >= 1");
    if (bins < 2) throw InvalidArgument("experiment: bins must be >= 2");
    if (epsilon && !(*epsilon > 0.0)) throw InvalidArgument("experiment: epsilon must be positive");
    if (ms_path.has_value() != pan_path.has_value()) {
        throw InvalidArgument("experiment: --ms and --pan must be given together");
    }
}

bool ExperimentResult::any_failed() const {
    return std::any_of(runs.begin(), runs.end(), [](const RunRecord& r) { return !r.error.empty(); }) ||
           std::any_of(pan_correction.begin(), pan_correction.end(),
                       [](const PanCorrectionRecord& r) { return !r.error.empty(); });
}

namespace {

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

struct Scene {
    WaldInputs inputs;
    SpectralWeights provider;
};

struct Outcome {
    bool ok = false;
    std::string error;
    std::vector<double> per_band;
    double mean = 0.0;
    double pan_rmse = 0.0;
    double pan_low_rmse = 0.0;
    std::vector<std::string> warnings;
};

std::vector<Scene> load_scenes(const ExperimentSpec& spec) {
    std::vector<Scene> scenes;
    if (spec.ms_path) {
        MultibandImage ms = io::load_image(*spec.ms_path);
        MultibandImage pan = io::load_image(*spec.pan_path);
        if (pan.band_count() != 1) {
            throw DimensionError(*spec.pan_path + ": Pan image must have exactly one band, found " +
                                 std::to_string(pan.band_count()));
        }
        SpectralWeights provider = SpectralWeights::uniform(ms.band_count());
        if (spec.weights_path) {
            auto w = io::read_weights(*spec.weights_path);
            if (w.size() != ms.band_count()) {
                throw DimensionError(*spec.weights_path + ": expected " +
                                     std::to_string(ms.band_count()) + " weights, found " +
                                     std::to_string(w.size()));
            }
            provider = SpectralWeights(std::move(w));
        }
        scenes.push_back({prepare_wald_inputs(ms, pan.band(0), spec.ratio, spec.filter_order, spec.cutoff),
                          std::move(provider)});
        return scenes;
    }
    for (int r = 0; r < spec.repeats; ++r) {
        SynthScene s = make_synthetic_scene(spec.seed + static_cast<std::uint64_t>(r), spec.synth);
        scenes.push_back({prepare_wald_inputs(s.ms, s.pan, spec.ratio, spec.filter_order, spec.cutoff),
                          SpectralWeights(s.provider_weights)});
    }
    return scenes;
}

Outcome run_one(const FusionConfig& config, const Scene& scene) {
    Outcome out;
    try {
        WorkflowResult r = run_workflow(scene.inputs.ms_lr, scene.inputs.pan_hr, config, scene.provider);
        evaluate_workflow(r, scene.inputs.reference);
        out.per_band = r.report.rmse->per_band;
        out.mean = r.report.rmse->mean;
        out.pan_rmse = *r.report.rmse->pan_rmse;
        out.pan_low_rmse = r.report.pan_low_rmse;
        out.warnings = r.report.warnings;
        out.ok = true;
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    return out;
}

/// Seed-averaged outcome; the first failing scene (in scene order) wins.
Outcome average(const std::vector<Outcome>& per_scene) {
    Outcome acc;
    for (const auto& o : per_scene) {
        if (!o.ok) return o;
    }
    acc.ok = true;
    const double n = static_cast<double>(per_scene.size());
    acc.per_band.assign(per_scene.front().per_band.size(), 0.0);
    for (const auto& o : per_scene) {
        for (std::size_t k = 0; k < acc.per_band.size(); ++k) acc.per_band[k] += o.per_band[k] / n;
        acc.mean += o.mean / n;
        acc.pan_rmse += o.pan_rmse / n;
        acc.pan_low_rmse += o.pan_low_rmse / n;
    }
    acc.warnings = per_scene.front().warnings;
    return acc;
}

} // namespace

unsigned thread_cap_from_env() {
    if (const char* env = std::getenv("PANSHARP_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

ExperimentResult run_experiment(const ExperimentSpec& spec, unsigned threads) {
    spec.validate();
    const std::vector<Scene> scenes = load_scenes(spec);

    FilterSpec filter = scenes.front().inputs.filter;
    auto make_config = [&](FusionMethod method, const AdjustmentMode& mode, WeightSource ws, bool mhm) {
        FusionConfig c;
        c.method = method;
        c.adjustment = mode;
        c.adjustment.bins = spec.bins;
        c.weight_source = ws;
        c.mhm = mhm;
        c.filter = filter;
        c.epsilon = spec.epsilon;
        return c;
    };

    std::vector<FusionConfig> configs;
    if (std::find(spec.methods.begin(), spec.methods.end(), FusionMethod::msi) != spec.methods.end()) {
        configs.push_back(make_config(FusionMethod::msi, AdjustmentMode{}, WeightSource::provider, false));
    }
    for (const auto& mode : spec.modes)
        for (auto ws : spec.weight_sources)
            for (bool mhm : spec.mhm)
                for (auto method : spec.methods)
                    if (method != FusionMethod::msi) configs.push_back(make_config(method, mode, ws, mhm));
    const std::size_t run_count = configs.size();

    // Pan-correction rows share the workflow path: CS m, provider weights, no MHM.
    std::vector<AdjustmentMode> pc_modes;
    for (const auto& mode : spec.modes) {
        if (std::find(pc_modes.begin(), pc_modes.end(), mode) == pc_modes.end()) pc_modes.push_back(mode);
    }
    for (const auto& mode : pc_modes) {
        configs.push_back(make_config(FusionMethod::cs_m, mode, WeightSource::provider, false));
    }

    const std::size_t jobs = configs.size() * scenes.size();
    std::vector<Outcome> outcomes(jobs);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t j = next++; j < jobs; j = next++) {
            outcomes[j] = run_one(configs[j / scenes.size()], scenes[j % scenes.size()]);
        }
    };
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), jobs));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
    }

    ExperimentResult result;
    result.bands = scenes.front().inputs.ms_lr.band_count();
    for (std::size_t c = 0; c < configs.size(); ++c) {
        const std::vector<Outcome> per_scene(outcomes.begin() + static_cast<std::ptrdiff_t>(c * scenes.size()),
                                             outcomes.begin() + static_cast<std::ptrdiff_t>((c + 1) * scenes.size()));
        const Outcome avg = average(per_scene);
        if (c < run_count) {
            RunRecord rec;
            rec.config = configs[c];
            rec.report.mode = configs[c].mode_label();
            rec.report.method = configs[c].method;
            if (avg.ok) {
                rec.report.rmse = RmseReport{avg.per_band, avg.mean, avg.pan_rmse};
                rec.report.pan_low_rmse = avg.pan_low_rmse;
                rec.report.warnings = avg.warnings;
            } else {
                rec.error = avg.error;
            }
            result.runs.push_back(std::move(rec));
        } else {
            PanCorrectionRecord rec;
            rec.mode = configs[c].adjustment;
            if (avg.ok) {
                rec.rmse_high = avg.pan_rmse;
                rec.rmse_low = avg.pan_low_rmse;
            } else {
                rec.error = avg.error;
            }
            result.pan_correction.push_back(std::move(rec));
        }
    }
    return result;
}

std::string ExperimentResult::runs_csv() const {
    std::string out = WorkflowReport::csv_header(bands) + ",status\n";
    for (const auto& r : runs) {
        out += r.report.csv_row(bands) + "," + (r.error.empty() ? "ok" : quote("error: " + r.error)) + "\n";
    }
    return out;
}

std::string ExperimentResult::pan_correction_csv() const {
    std::string out = "correction,rmse_hr,rmse_lr,status\n";
    for (const auto& r : pan_correction) {
        out += quote(r.mode.label()) + ",";
        if (r.error.empty()) {
            out += format_value(r.rmse_high) + "," + format_value(r.rmse_low) + ",ok\n";
        } else {
            out += ",," + quote("error: " + r.error) + "\n";
        }
    }
    return out;
}

namespace {

std::vector<FusionMethod> methods_in(const std::vector<RunRecord>& runs) {
    std::vector<FusionMethod> out;
    for (const auto& r : runs) {
        if (std::find(out.begin(), out.end(), r.config.method) == out.end()) out.push_back(r.config.method);
    }
    std::sort(out.begin(), out.end(), [](FusionMethod a, FusionMethod b) {
        // MSI first, then the fusion methods in declaration order
        auto rank = [](FusionMethod m) { return m == FusionMethod::msi ? -1 : static_cast<int>(m); };
        return rank(a) < rank(b);
    });
    return out;
}

std::vector<std::string> labels_in(const std::vector<RunRecord>& runs) {
    std::vector<std::string> out;
    for (const auto& r : runs) {
        if (r.config.method == FusionMethod::msi) continue;
        if (std::find(out.begin(), out.end(), r.report.mode) == out.end()) out.push_back(r.report.mode);
    }
    return out;
}

const RunRecord* find_run(const std::vector<RunRecord>& runs, FusionMethod m, const std::string& label) {
    for (const auto& r : runs) {
        if (r.config.method == m && (m == FusionMethod::msi || r.report.mode == label)) return &r;
    }
    return nullptr;
}

} // namespace

std::string ExperimentResult::method_comparison_csv() const {
    const auto methods = methods_in(runs);
    auto labels = labels_in(runs);
    if (labels.empty()) labels.push_back("MSI");
    std::string out = "mode";
    for (auto m : methods) out += std::string(",") + to_string(m);
    out += "\n";
    for (std::size_t row = 0; row < labels.size(); ++row) {
        out += quote(labels[row]);
        for (auto m : methods) {
            out += ",";
            const RunRecord* r = (m == FusionMethod::msi && row != 0) ? nullptr : find_run(runs, m, labels[row]);
            out += r && r->report.rmse ? format_value(r->report.rmse->mean) : "-";
        }
        out += "\n";
    }
    return out;
}

std::string ExperimentResult::per_band_csv(const std::optional<std::string>& mode_label) const {
    const auto methods = methods_in(runs);
    const auto labels = labels_in(runs);
    const std::string label = mode_label ? *mode_label : (labels.empty() ? "MSI" : labels.back());
    if (mode_label && std::find(labels.begin(), labels.end(), label) == labels.end()) {
        throw InvalidArgument("per-band mode '" + label + "' is not part of the grid");
    }
    std::string out = "band";
    for (auto m : methods) out += std::string(",") + to_string(m);
    out += "\n";
    for (std::size_t k = 0; k <= bands; ++k) {
        out += k < bands ? std::to_string(k + 1) : std::string("Mean of all bands");
        for (auto m : methods) {
            out += ",";
            const RunRecord* r = find_run(runs, m, label);
            if (r && r->report.rmse) {
                out += format_value(k < bands ? r->report.rmse->per_band[k] : r->report.rmse->mean);
            } else {
                out += "-";
            }
        }
        out += "\n";
    }
    return out;
}

} // namespace pansharp

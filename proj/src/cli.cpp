#include "pansharp/cli.hpp"

#include "pansharp/error.hpp"
#include "pansharp/experiment.hpp"
#include "pansharp/io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace pansharp {

namespace fs = std::filesystem;

namespace {

/// Bad flag values discovered after parsing; reported with exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <class F>
auto as_usage(F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path.string() + ": cannot open for writing");
    out << text;
    if (!out) throw IoError(path.string() + ": write failed");
}

Raster single_band(const MultibandImage& img, const std::string& what) {
    if (img.band_count() != 1) {
        throw DimensionError(what + ": Pan image must have exactly one band, found " +
                             std::to_string(img.band_count()));
    }
    return img.band(0);
}

SpectralWeights load_weights(const std::string& path, std::size_t bands) {
    if (path.empty()) return SpectralWeights::uniform(bands);
    auto w = io::read_weights(path);
    if (w.size() != bands) {
        throw UsageError("--weights " + path + ": expected K = " + std::to_string(bands) +
                         " weights (one per MS band), found " + std::to_string(w.size()));
    }
    return as_usage([&] { return SpectralWeights(std::move(w)); });
}

nlohmann::ordered_json filter_json(const FilterSpec& f) {
    nlohmann::ordered_json j;
    j["kind"] = f.kind == FilterKind::butterworth ? "butterworth" : "boxcar";
    j["ratio"] = f.ratio;
    j["cutoff"] = f.cutoff;
    j["order"] = f.order;
    return j;
}

struct DegradeArgs {
    std::string ms, pan, out = ".";
    int ratio = 2;
    int pan_ratio = 0;
    int order = 5;
    double cutoff = 0.0;
};

int cmd_degrade(const DegradeArgs& a, bool cutoff_set, std::ostream& out) {
    FilterSpec spec_ms = as_usage([&] {
        FilterSpec f = FilterSpec::for_ratio(a.ratio, a.order);
        if (cutoff_set) f.cutoff = a.cutoff;
        f.validate();
        return f;
    });
    const int pan_ratio = a.pan_ratio > 0 ? a.pan_ratio : a.ratio;
    FilterSpec spec_pan = as_usage([&] {
        FilterSpec f = FilterSpec::for_ratio(pan_ratio, a.order);
        if (cutoff_set) f.cutoff = a.cutoff * a.ratio / pan_ratio;
        f.validate();
        return f;
    });

    const MultibandImage ms = io::load_image(a.ms);
    const Raster pan = single_band(io::load_image(a.pan), a.pan);
    WaldPair pair = degrade_wald(ms, pan, spec_ms, spec_pan);

    const fs::path dir(a.out);
    fs::create_directories(dir);
    io::save_image(pair.ms_lr, dir / "ms_lr");
    io::save_image(MultibandImage({pair.pan_lr}), dir / "pan_lr");

    nlohmann::ordered_json prov;
    prov["ms_input"] = a.ms;
    prov["pan_input"] = a.pan;
    prov["ms_filter"] = filter_json(spec_ms);
    prov["pan_filter"] = filter_json(spec_pan);
    prov["ms_lr"] = {{"width", pair.ms_lr.width()}, {"height", pair.ms_lr.height()},
                     {"bands", pair.ms_lr.band_count()}};
    prov["pan_lr"] = {{"width", pair.pan_lr.width()}, {"height", pair.pan_lr.height()}};
    write_text(dir / "degrade.json", prov.dump(2) + "\n");
    out << "ms_lr " << pair.ms_lr.width() << "x" << pair.ms_lr.height() << ", pan_lr "
        << pair.pan_lr.width() << "x" << pair.pan_lr.height() << " -> " << dir.string() << "\n";
    return 0;
}

struct FuseArgs {
    std::string ms, pan, out = ".", weights, reference;
    int ratio = 0;
    std::string method = "cs_m";
    std::string phm = "none";
    std::string phm_scale = "low";
    bool pc = true;
    bool mhm = true;
    std::string weight_source = "estimated_low";
    int order = 5;
    double cutoff = 0.0;
    int bins = kDefaultHistogramBins;
    double epsilon = 0.0;
    bool literal_ratio = false;
};

HistogramMatching parse_phm(const std::string& s) {
    if (s == "none") return HistogramMatching::none;
    if (s == "full") return HistogramMatching::full;
    if (s == "simple") return HistogramMatching::simple;
    throw UsageError("--phm must be none, full or simple");
}

int cmd_fuse(const FuseArgs& a, bool cutoff_set, bool epsilon_set, std::ostream& out,
             std::ostream& err) {
    FusionConfig config;
    config.method = as_usage([&] { return parse_method(a.method); });
    config.weight_source = as_usage([&] { return parse_weight_source(a.weight_source); });
    config.adjustment.phm = parse_phm(a.phm);
    config.adjustment.phm_scale = a.phm_scale == "high" ? MatchScale::high : MatchScale::low;
    config.adjustment.pc = a.pc;
    config.adjustment.bins = a.bins;
    config.mhm = a.mhm;
    config.literal_ratio_form = a.literal_ratio;
    if (epsilon_set) config.epsilon = a.epsilon;

    const MultibandImage ms = io::load_image(a.ms);
    const Raster pan = single_band(io::load_image(a.pan), a.pan);
    const SpectralWeights w0 = load_weights(a.weights, ms.band_count());

    if (pan.width() % ms.width() != 0 || pan.width() / ms.width() == 0) {
        throw DimensionError("Pan width " + std::to_string(pan.width()) +
                             " is not a multiple of MS width " + std::to_string(ms.width()));
    }
    const int ratio = a.ratio > 0 ? a.ratio : static_cast<int>(pan.width() / ms.width());
    config.filter = as_usage([&] {
        FilterSpec f = FilterSpec::for_ratio(ratio, a.order);
        if (cutoff_set) f.cutoff = a.cutoff;
        return f;
    });
    as_usage([&] { config.validate(); return 0; });

    WorkflowResult result = run_workflow(ms, pan, config, w0);
    if (!a.reference.empty()) evaluate_workflow(result, io::load_image(a.reference));
    for (const auto& w : result.report.warnings) err << "warning: " << w << "\n";

    const fs::path dir(a.out);
    fs::create_directories(dir);
    io::save_image(result.fused, dir / "fused");
    const std::size_t k = ms.band_count();
    write_text(dir / "report.csv",
               WorkflowReport::csv_header(k) + "\n" + result.report.csv_row(k) + "\n");

    nlohmann::ordered_json rep;
    rep["mode"] = result.report.mode;
    rep["method"] = to_string(result.report.method);
    rep["fusion_weights"] = result.report.fusion_weights.values();
    rep["correction_weights"] = result.report.correction_weights.values();
    rep["pan_low_rmse"] = result.report.pan_low_rmse;
    rep["epsilon"] = result.report.epsilon;
    rep["warnings"] = result.report.warnings;
    if (result.report.rmse) {
        rep["rmse"] = {{"per_band", result.report.rmse->per_band},
                       {"mean", result.report.rmse->mean}};
        if (result.report.rmse->pan_rmse) rep["rmse"]["pan"] = *result.report.rmse->pan_rmse;
    }
    write_text(dir / "report.json", rep.dump(2) + "\n");
    out << result.report.mode << " / " << to_string(result.report.method) << " -> "
        << dir.string() << "\n";
    return 0;
}

struct ExperimentArgs {
    std::string ms, pan, weights, out = ".";
    int ratio = 2;
    int order = 5;
    double cutoff = 0.0;
    int bins = kDefaultHistogramBins;
    double epsilon = 0.0;
    std::string modes;
    std::string weight_sources = "provider,estimated_low,estimated_high";
    std::string methods = "msi,cs_a,cs_m,hpf_a,hpf_m";
    bool mhm = true;
    std::uint64_t seed = 0;
    int repeats = 1;
    std::size_t size = 128;
    unsigned threads = 0;
    std::string per_band_mode;
};

int cmd_experiment(const ExperimentArgs& a, const CLI::App& sub, std::ostream& out,
                   std::ostream& err) {
    ExperimentSpec spec = ExperimentSpec::full_grid();
    if (!a.ms.empty()) spec.ms_path = a.ms;
    if (!a.pan.empty()) spec.pan_path = a.pan;
    if (!a.weights.empty()) spec.weights_path = a.weights;
    spec.ratio = a.ratio;
    spec.filter_order = a.order;
    if (sub.count("--cutoff")) spec.cutoff = a.cutoff;
    spec.bins = a.bins;
    if (sub.count("--epsilon")) spec.epsilon = a.epsilon;
    if (sub.count("--modes")) {
        spec.modes.clear();
        for (const auto& t : split_list(a.modes)) {
            spec.modes.push_back(as_usage([&] { return parse_adjustment_mode(t); }));
        }
    }
    spec.weight_sources.clear();
    for (const auto& t : split_list(a.weight_sources)) {
        spec.weight_sources.push_back(as_usage([&] { return parse_weight_source(t); }));
    }
    spec.methods.clear();
    for (const auto& t : split_list(a.methods)) {
        spec.methods.push_back(as_usage([&] { return parse_method(t); }));
    }
    if (sub.count("--mhm")) {
        spec.mhm = {a.mhm};
    }
    spec.seed = a.seed;
    spec.repeats = a.repeats;
    spec.synth.ms_size = a.size;
    if (!a.per_band_mode.empty()) spec.per_band_mode = a.per_band_mode;
    as_usage([&] { spec.validate(); return 0; });

    const unsigned threads = a.threads > 0 ? a.threads : thread_cap_from_env();
    ExperimentResult result = run_experiment(spec, threads);

    const fs::path dir(a.out);
    fs::create_directories(dir);
    write_text(dir / "runs.csv", result.runs_csv());
    write_text(dir / "pan_correction.csv", result.pan_correction_csv());
    write_text(dir / "method_comparison.csv", result.method_comparison_csv());
    write_text(dir / "per_band.csv", as_usage([&] { return result.per_band_csv(spec.per_band_mode); }));

    std::size_t failed = 0;
    for (const auto& r : result.runs) {
        if (!r.error.empty()) {
            ++failed;
            err << "row failed: " << r.report.mode << " / " << to_string(r.config.method) << ": "
                << r.error << "\n";
        }
    }
    for (const auto& r : result.pan_correction) {
        if (!r.error.empty()) {
            ++failed;
            err << "pan correction row failed: " << r.mode.label() << ": " << r.error << "\n";
        }
    }
    out << result.runs.size() << " runs, " << result.pan_correction.size()
        << " pan-correction rows -> " << dir.string() << "\n";
    return failed ? 1 : 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Pansharpening with Pan correction", "pansharp"};
    app.require_subcommand(1);

    DegradeArgs dg;
    auto* degrade = app.add_subcommand("degrade", "Build reduced-resolution MS and Pan inputs");
    degrade->add_option("--ms", dg.ms, "MS image stem (.json/.raw) or .pgm")->required();
    degrade->add_option("--pan", dg.pan, "Pan image stem (.json/.raw) or .pgm")->required();
    degrade->add_option("--ratio", dg.ratio, "MS reduction factor")->capture_default_str();
    degrade->add_option("--pan-ratio", dg.pan_ratio, "Pan reduction factor (default: --ratio)");
    degrade->add_option("--filter-order", dg.order, "Butterworth order")->capture_default_str();
    degrade->add_option("--cutoff", dg.cutoff, "MS filter cutoff in cycles/sample (default 0.5/ratio)");
    degrade->add_option("--out", dg.out, "Output directory")->capture_default_str();

    FuseArgs fu;
    auto* fuse = app.add_subcommand("fuse", "Pansharpen one MS/Pan pair");
    fuse->add_option("--ms", fu.ms, "MS image stem")->required();
    fuse->add_option("--pan", fu.pan, "Pan image stem")->required();
    fuse->add_option("--ratio", fu.ratio, "Resolution ratio (default: Pan width / MS width)");
    fuse->add_option("--method", fu.method, "cs_a, cs_m, hpf_a, hpf_m or msi")->capture_default_str();
    fuse->add_option("--phm", fu.phm, "Pan histogram matching: none, full, simple")->capture_default_str();
    fuse->add_option("--phm-scale", fu.phm_scale, "PHM target scale: low, high")
        ->check(CLI::IsMember({"low", "high"}))
        ->capture_default_str();
    fuse->add_flag("--pc,!--no-pc", fu.pc, "Pan correction (default on)");
    fuse->add_flag("--mhm,!--no-mhm", fu.mhm, "MS histogram matching after fusion (default on)");
    fuse->add_option("--weights", fu.weights, "Provider weights, JSON array of K reals");
    fuse->add_option("--weight-source", fu.weight_source,
                     "provider, estimated_low or estimated_high")
        ->capture_default_str();
    fuse->add_option("--filter-order", fu.order, "Butterworth order")->capture_default_str();
    fuse->add_option("--cutoff", fu.cutoff, "Filter cutoff in cycles/sample (default 0.5/ratio)");
    fuse->add_option("--bins", fu.bins, "Histogram bins")->capture_default_str();
    fuse->add_option("--epsilon", fu.epsilon, "Safe-divide floor (default 1e-6 of the Pan range)");
    fuse->add_flag("--literal-ratio", fu.literal_ratio, "Multiplicative methods use S + P/L");
    fuse->add_option("--reference", fu.reference, "Reference MS for RMSE evaluation");
    fuse->add_option("--out", fu.out, "Output directory")->capture_default_str();

    ExperimentArgs ex;
    auto* experiment = app.add_subcommand("experiment", "Run the correction/fusion comparison grid");
    experiment->add_option("--ms", ex.ms, "Original-resolution MS (default: synthetic scene)");
    experiment->add_option("--pan", ex.pan, "Original-resolution Pan");
    experiment->add_option("--weights", ex.weights, "Provider weights, JSON array of K reals");
    experiment->add_option("--ratio", ex.ratio, "Reduction factor of the MS")->capture_default_str();
    experiment->add_option("--filter-order", ex.order, "Butterworth order")->capture_default_str();
    experiment->add_option("--cutoff", ex.cutoff, "Fusion filter cutoff (default 0.5/ratio)");
    experiment->add_option("--bins", ex.bins, "Histogram bins")->capture_default_str();
    experiment->add_option("--epsilon", ex.epsilon, "Safe-divide floor");
    experiment->add_option("--modes", ex.modes,
                           "Comma-separated correction modes, e.g. before,pc,phm-full-low+pc "
                           "(default: full grid)");
    experiment->add_option("--weight-source", ex.weight_sources, "Comma-separated weight sources")
        ->capture_default_str();
    experiment->add_option("--method", ex.methods, "Comma-separated fusion methods")
        ->capture_default_str();
    experiment->add_flag("--mhm,!--no-mhm", ex.mhm, "Only with / only without MHM (default both)");
    experiment->add_option("--seed", ex.seed, "Synthetic scene seed")->capture_default_str();
    experiment->add_option("--repeats", ex.repeats, "Synthetic scenes averaged (seed, seed+1, ...)")
        ->capture_default_str();
    experiment->add_option("--size", ex.size, "Synthetic MS edge length")->capture_default_str();
    experiment->add_option("--threads", ex.threads, "Worker threads (default PANSHARP_THREADS)");
    experiment->add_option("--per-band-mode", ex.per_band_mode, "Mode label of the per-band table");
    experiment->add_option("--out", ex.out, "Output directory")->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e, out, err);
        err << "error: " << e.what() << "\n";
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return 2;
    }

    try {
        if (degrade->parsed()) return cmd_degrade(dg, degrade->count("--cutoff") > 0, out);
        if (fuse->parsed()) {
            return cmd_fuse(fu, fuse->count("--cutoff") > 0, fuse->count("--epsilon") > 0, out, err);
        }
        return cmd_experiment(ex, *experiment, out, err);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace pansharp

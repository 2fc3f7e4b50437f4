#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rawnight/config.hpp"
#include "rawnight/container.hpp"
#include "rawnight/errors.hpp"
#include "rawnight/json_io.hpp"
#include "rawnight/pipeline.hpp"

namespace rawnight::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Globals {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    int workers = 1;
    std::string out;
};

// Effective configuration after flags are applied.
struct Context {
    RunConfig config;
    std::uint64_t seed = 0;
    std::string hash;
    int workers = 1;
    fs::path out;
};

Context make_context(const Globals& g) {
    Context ctx;
    if (!g.config_path.empty()) ctx.config = load_config(g.config_path);
    ctx.seed = resolve_seed(g.seed, ctx.config);
    ctx.config.master_seed = ctx.seed;
    if (!g.out.empty()) ctx.config.paths.output = g.out;
    ctx.config.validate();
    ctx.hash = config_hash(ctx.config);
    if (g.workers < 1) throw ConfigError("--jobs must be at least 1");
    ctx.workers = g.workers;
    ctx.out = ctx.config.paths.output;
    return ctx;
}

void emit(const json& doc, const fs::path& path, std::ostream& out) {
    if (path.empty()) {
        out << doc.dump(2) << "\n";
    } else {
        write_json_file(path, doc);
    }
}

fs::path require_out_dir(const Context& ctx, std::string_view command) {
    if (ctx.out.empty()) {
        throw ConfigError(std::string(command) + " needs an output directory (--out or paths.output)");
    }
    fs::create_directories(ctx.out);
    return ctx.out;
}

// Rasters are looked up under --rasters, then paths.input, then next to the
// document that references them.
fs::path raster_root(const std::string& flag, const Context& ctx, const fs::path& document) {
    if (!flag.empty()) return flag;
    if (!ctx.config.paths.input.empty()) return ctx.config.paths.input;
    return document.parent_path();
}

AnnotationSet load_annotations(const fs::path& path) {
    auto set = annotations_from_json(read_json_file(path));
    set.validate();
    return set;
}

GainPolicy parse_gain_policy(const std::string& text) {
    if (text == "keep") return KeepCalibration{};
    if (text == "preserve") return PreserveDnMagnitude{};
    if (text.rfind("iso:", 0) == 0) {
        try {
            return MatchIso{std::stoi(text.substr(4))};
        } catch (const std::exception&) {
        }
    }
    throw ConfigError("gain policy must be keep, preserve or iso:<ISO>, got '" + text + "'");
}

std::vector<double> read_values(const fs::path& path) {
    const auto doc = read_json_file(path);
    try {
        if (doc.is_array()) return doc.get<std::vector<double>>();
        check_schema_version(doc, "values");
        return doc.at("values").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw InputError("invalid values document " + path.string() + ": " + e.what());
    }
}

// Electron means of the ground truth matched at IOU 0.50.
std::vector<double> tp_values(const std::vector<Detection>& dets, const AnnotationSet& set,
                              double score_thr) {
    const auto match = match_detections(dets, set.instances, 0.5, score_thr);
    std::vector<double> values;
    for (const auto& e : match.entries) {
        if (!e.is_tp) continue;
        const auto& gt = set.instances[*e.gt];
        if (!gt.electron_mean) {
            throw InputError("instance '" + gt.id + "' has no electron mean");
        }
        values.push_back(*gt.electron_mean);
    }
    return values;
}

// ---- convert ----

struct ConvertArgs {
    std::string input;
    std::string sidecar;
    std::string to;
    std::string output;
    std::string calibration;
    int bit_depth = 0;
};

int cmd_convert(const ConvertArgs& a, const Context&, std::ostream& out) {
    auto file = a.sidecar.empty() ? read_container(a.input) : import_plane(a.input, a.sidecar);
    if (!a.calibration.empty()) {
        file.calib = read_json_file(a.calibration).get<SensorCalibration>();
    }
    if (a.bit_depth != 0) file.bit_depth = a.bit_depth;
    file.calib.validate(file.bit_depth);

    RasterFile result;
    result.calib = file.calib;
    result.bit_depth = file.bit_depth;
    result.cfa = file.cfa;
    result.provenance = file.provenance;
    if (a.to == "electrons") {
        result.raster = file.to_electrons();
    } else {
        result.raster = file.payload() == PayloadKind::DnU16
                            ? file.dn()
                            : electrons_to_dn(file.electrons(), file.calib, file.bit_depth, file.cfa);
    }
    write_container(a.output, result);
    out << json{{"output", a.output},
                {"payload", std::string(to_string(result.payload()))},
                {"width", result.width()},
                {"height", result.height()}}
               .dump()
        << "\n";
    return 0;
}

// ---- augment ----

struct AugmentArgs {
    std::string jobs;
    std::string rasters;
};

int cmd_augment(const AugmentArgs& a, const Context& ctx, std::ostream& out, std::ostream& err) {
    const auto jobs = jobs_from_json(read_json_file(a.jobs));
    const auto dir = require_out_dir(ctx, "augment");

    AugmentOptions options;
    options.out_dir = dir;
    options.source_root = raster_root(a.rasters, ctx, a.jobs);
    options.ladder = ctx.config.iso_ladder;
    options.workers = ctx.workers;
    options.config_hash = ctx.hash;
    const auto manifest = run_augment(jobs, options);
    write_json_file(dir / "manifest.json", manifest_to_json(manifest));

    std::vector<std::string> failed;
    for (const auto& e : manifest.entries) {
        if (!e.ok) failed.push_back(e.job_id);
    }
    out << json{{"manifest", (dir / "manifest.json").string()},
                {"jobs", manifest.entries.size()},
                {"failed", failed.size()}}
               .dump()
        << "\n";
    if (!failed.empty()) {
        err << json{{"error",
                     {{"kind", "job"},
                      {"message", std::to_string(failed.size()) + " of " +
                                      std::to_string(manifest.entries.size()) + " jobs failed"},
                      {"failed_jobs", failed}}}}
                   .dump()
            << "\n";
        return 1;
    }
    return 0;
}

// ---- pair ----

struct PairArgs {
    std::string annotations;
    std::string sets;
};

int cmd_pair(const PairArgs& a, const Context& ctx, std::ostream& out) {
    const auto set = load_annotations(a.annotations);
    std::vector<Instance> set_a, set_b;
    if (a.sets.empty()) {
        // Without explicit sets, normal-light instances are paired to low-light ones.
        for (const auto& inst : set.instances) {
            (inst.light_condition == LightCondition::Low ? set_b : set_a).push_back(inst);
        }
    } else {
        const auto doc = read_json_file(a.sets);
        check_schema_version(doc, "pair sets");
        try {
            for (const auto& id : doc.at("set_a").get<std::vector<std::string>>()) {
                set_a.push_back(set.instance(id));
            }
            for (const auto& id : doc.at("set_b").get<std::vector<std::string>>()) {
                set_b.push_back(set.instance(id));
            }
        } catch (const json::exception& e) {
            throw InputError(std::string("invalid pair sets: ") + e.what());
        }
    }
    auto doc = pairing_to_json(pair_by_area(set_a, set_b));
    doc["config_hash"] = ctx.hash;
    emit(doc, ctx.out, out);
    return 0;
}

// ---- sample-targets ----

struct SampleArgs {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t n = 8;
    std::string complementary;
    std::optional<std::size_t> per_bin;
    std::string sources;
    std::string rasters;
    std::string mode = "noise_aware_gaussian";
    std::string gain_policy = "keep";
};

int cmd_sample_targets(const SampleArgs& a, const Context& ctx, std::ostream& out) {
    json doc = {{"schema_version", kSchemaVersion}, {"config_hash", ctx.hash}};
    if (!a.complementary.empty()) {
        auto set = load_annotations(a.complementary);
        annotate_electron_means(set, raster_root(a.rasters, ctx, a.complementary));
        std::vector<double> existing;
        for (const auto& inst : set.instances) existing.push_back(*inst.electron_mean);
        doc["seed"] = ctx.seed;
        doc["bins"] = complementary_to_json(
            complementary_targets(existing, a.lo, a.hi, a.n, a.per_bin, ctx.seed));
        emit(doc, ctx.out, out);
        return 0;
    }

    const auto targets = log_uniform_targets(a.lo, a.hi, a.n);
    if (a.sources.empty()) {
        doc["targets"] = targets;
        emit(doc, ctx.out, out);
        return 0;
    }
    auto set = load_annotations(a.sources);
    annotate_electron_means(set, raster_root(a.rasters, ctx, a.sources));
    auto jobs = build_synthetic_sweep(set.instances, targets, ctx.seed, parse_thin_mode(a.mode),
                                      parse_gain_policy(a.gain_policy));
    resolve_sources(jobs, set);
    doc = jobs_to_json(jobs, ctx.seed);
    doc["targets"] = targets;
    doc["config_hash"] = ctx.hash;
    emit(doc, ctx.out, out);
    return 0;
}

// ---- partition ----

struct PartitionArgs {
    std::string values;
    std::string detections;
    std::string annotations;
    std::string rasters;
    std::string targets;
    std::size_t bins = 10;
};

int cmd_partition(const PartitionArgs& a, const Context& ctx, std::ostream& out) {
    IntervalPartition partition;
    if (!a.targets.empty()) {
        partition = partition_around_targets(read_values(a.targets));
    } else if (!a.values.empty()) {
        partition = equal_tp_partition(read_values(a.values), a.bins);
    } else if (!a.detections.empty() && !a.annotations.empty()) {
        auto set = load_annotations(a.annotations);
        annotate_electron_means(set, raster_root(a.rasters, ctx, a.annotations));
        const auto dets = detections_from_json(read_json_file(a.detections));
        partition = equal_tp_partition(tp_values(dets, set, ctx.config.eval.score_thr), a.bins);
    } else {
        throw ConfigError("partition needs --values, --targets, or --detections with --annotations");
    }
    auto doc = partition_to_json(partition);
    doc["config_hash"] = ctx.hash;
    emit(doc, ctx.out, out);
    return 0;
}

// ---- eval ----

struct EvalArgs {
    std::string detections;
    std::string annotations;
    std::string partition;
    std::optional<std::size_t> bins;
    std::string rasters;
};

int cmd_eval(const EvalArgs& a, const Context& ctx, std::ostream& out) {
    auto set = load_annotations(a.annotations);
    const auto dets = detections_from_json(read_json_file(a.detections));
    const auto& config = ctx.config.eval;

    if (a.partition.empty() && !a.bins) {
        auto doc = map_result_to_json(mean_average_precision(dets, set.instances, config));
        doc["schema_version"] = kSchemaVersion;
        doc["config_hash"] = ctx.hash;
        doc["eval"] = eval_config_to_json(config);
        emit(doc, ctx.out.empty() ? fs::path() : require_out_dir(ctx, "eval") / "eval.json", out);
        return 0;
    }

    annotate_electron_means(set, raster_root(a.rasters, ctx, a.annotations));
    const auto partition =
        a.partition.empty()
            ? equal_tp_partition(tp_values(dets, set, config.score_thr), *a.bins)
            : partition_from_json(read_json_file(a.partition));
    auto report = binned_evaluation(dets, set.instances, partition, config);
    report.seed = ctx.seed;
    report.config_hash = ctx.hash;
    const auto doc = binned_report_to_json(report);
    if (ctx.out.empty()) {
        out << doc.dump(2) << "\n";
        return 0;
    }
    const auto dir = require_out_dir(ctx, "eval");
    write_json_file(dir / "report.json", doc);
    const auto csv = binned_report_to_csv(report);
    write_bytes(dir / "report.csv",
                {reinterpret_cast<const std::uint8_t*>(csv.data()), csv.size()});
    out << json{{"report", (dir / "report.json").string()}, {"csv", (dir / "report.csv").string()}}
               .dump()
        << "\n";
    return 0;
}

// ---- ablation ----

struct AblationArgs {
    std::string annotations;
    std::string runs;
    std::string detector = "toy-threshold";
    std::string detections;
    std::string rasters;
    std::string mode = "noise_aware_gaussian";
    double min_mean = 3.5;
    double min_fano = 0.5;
};

int cmd_ablation(const AblationArgs& a, const Context& ctx, std::ostream& out) {
    auto set = load_annotations(a.annotations);
    const auto root = raster_root(a.rasters, ctx, a.annotations);
    annotate_electron_means(set, root);
    const auto runs = ablation_runs_from_json(read_json_file(a.runs));

    std::unique_ptr<Detector> detector;
    std::vector<Detection> recorded;
    if (a.detector == "toy-threshold") {
        detector = std::make_unique<ThresholdDetector>(a.min_mean);
    } else if (a.detector == "toy-variance") {
        detector = std::make_unique<VarianceDetector>(a.min_fano);
    } else if (a.detector == "recorded") {
        if (a.detections.empty()) throw ConfigError("--detector recorded needs --detections");
        recorded = detections_from_json(read_json_file(a.detections));
        detector = std::make_unique<RecordedDetections>(recorded);
    } else {
        throw ConfigError("unknown detector '" + a.detector + "'");
    }

    AblationOptions options;
    options.master_seed = ctx.seed;
    options.ladder = ctx.config.iso_ladder;
    options.eval = ctx.config.eval;
    options.workers = ctx.workers;
    options.out_dir = require_out_dir(ctx, "ablation");
    options.raster_root = root;
    options.noise_mode = parse_thin_mode(a.mode);
    if (options.noise_mode == ThinMode::Naive) {
        throw ConfigError("--mode must be a noise-aware mode; the naive arm is always included");
    }
    options.config_hash = ctx.hash;

    const auto outcome = run_ablation(set, runs, *detector, options);
    write_json_file(options.out_dir / "manifest.json", manifest_to_json(outcome.manifest));
    write_json_file(options.out_dir / "report.json", ablation_report_to_json(outcome.report));
    out << json{{"report", (options.out_dir / "report.json").string()},
                {"manifest", (options.out_dir / "manifest.json").string()},
                {"runs", outcome.report.runs.size()}}
               .dump()
        << "\n";
    return 0;
}

// ---- fit-noise ----

struct FitArgs {
    std::vector<std::string> frames;
    std::optional<double> black_level;
};

int cmd_fit_noise(const FitArgs& a, const Context& ctx, std::ostream& out) {
    std::vector<RawImage> frames;
    std::optional<double> black = a.black_level;
    for (const auto& path : a.frames) {
        const auto file = read_container(path);
        if (!black) black = file.calib.black_level;
        frames.push_back(file.dn());
    }
    auto doc = noise_fit_to_json(fit_poisson_gaussian(frames, black.value_or(0.0)));
    doc["schema_version"] = kSchemaVersion;
    doc["black_level"] = black.value_or(0.0);
    doc["config_hash"] = ctx.hash;
    emit(doc, ctx.out, out);
    return 0;
}

void report_error(std::ostream& err, std::string_view kind, std::string_view message) {
    err << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"synthetic low-light RAW generation and illumination-binned evaluation"};
    app.name("rawnight");
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--config", g.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "master seed (overrides config and RAWNIGHT_SEED)");
    app.add_option("--jobs", g.workers, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--out", g.out,
                   "output directory (augment, eval, ablation) or output file (other commands)");

    ConvertArgs convert;
    auto* c_convert = app.add_subcommand("convert", "DN <-> electron container conversion");
    c_convert->add_option("input", convert.input, "container, or bare uint16 plane with --sidecar")
        ->required();
    c_convert->add_option("--sidecar", convert.sidecar, "JSON sidecar of a bare plane");
    c_convert->add_option("--to", convert.to, "target payload")
        ->required()
        ->check(CLI::IsMember({"electrons", "dn"}));
    c_convert->add_option("-o,--output", convert.output, "output container")->required();
    c_convert->add_option("--calibration", convert.calibration, "override calibration JSON");
    c_convert->add_option("--bit-depth", convert.bit_depth, "override bit depth");

    AugmentArgs augment;
    auto* c_augment = app.add_subcommand("augment", "run a job list into synthetic containers");
    c_augment->add_option("jobs_file", augment.jobs, "job list JSON")->required();
    c_augment->add_option("--rasters", augment.rasters, "root for relative source files");

    PairArgs pair;
    auto* c_pair = app.add_subcommand("pair", "area-matched pairing");
    c_pair->add_option("annotations", pair.annotations)->required();
    c_pair->add_option("--sets", pair.sets, "JSON with set_a and set_b instance ids");

    SampleArgs sample;
    auto* c_sample = app.add_subcommand("sample-targets", "log-uniform illumination targets");
    c_sample->add_option("--lo", sample.lo)->required();
    c_sample->add_option("--hi", sample.hi)->required();
    c_sample->add_option("-n,--count", sample.n, "targets, or bins with --complementary");
    c_sample->add_option("--complementary", sample.complementary,
                         "annotations whose histogram is filled up");
    c_sample->add_option("--per-bin", sample.per_bin, "fill level (default: fullest bin)");
    c_sample->add_option("--sources", sample.sources, "annotations; emit one job per source x target");
    c_sample->add_option("--rasters", sample.rasters);
    c_sample->add_option("--mode", sample.mode);
    c_sample->add_option("--gain-policy", sample.gain_policy, "keep | preserve | iso:<ISO>");

    PartitionArgs partition;
    auto* c_partition = app.add_subcommand("partition", "equal-TP illumination intervals");
    c_partition->add_option("--values", partition.values, "JSON array of TP electron means");
    c_partition->add_option("--detections", partition.detections);
    c_partition->add_option("--annotations", partition.annotations);
    c_partition->add_option("--rasters", partition.rasters);
    c_partition->add_option("--targets", partition.targets, "intervals around sweep targets");
    c_partition->add_option("-n,--bins", partition.bins);

    EvalArgs eval;
    auto* c_eval = app.add_subcommand("eval", "AP/mAP, optionally per illumination interval");
    c_eval->add_option("--detections", eval.detections)->required();
    c_eval->add_option("--annotations", eval.annotations)->required();
    c_eval->add_option("--partition", eval.partition, "partition JSON");
    c_eval->add_option("-n,--bins", eval.bins, "build an equal-TP partition with n bins");
    c_eval->add_option("--rasters", eval.rasters);

    AblationArgs ablation;
    auto* c_ablation = app.add_subcommand("ablation", "real vs noise-aware vs naive comparison");
    c_ablation->add_option("--annotations", ablation.annotations)->required();
    c_ablation->add_option("--runs", ablation.runs, "JSON with runs[].set_a / set_b")->required();
    c_ablation->add_option("--detector", ablation.detector)
        ->check(CLI::IsMember({"toy-threshold", "toy-variance", "recorded"}));
    c_ablation->add_option("--detections", ablation.detections, "for --detector recorded");
    c_ablation->add_option("--rasters", ablation.rasters);
    c_ablation->add_option("--mode", ablation.mode, "noise-aware thinning mode");
    c_ablation->add_option("--min-mean", ablation.min_mean, "toy-threshold cutoff in electrons");
    c_ablation->add_option("--min-fano", ablation.min_fano, "toy-variance cutoff");

    FitArgs fit;
    auto* c_fit = app.add_subcommand("fit-noise", "gain and read noise from flat frames");
    c_fit->add_option("frames", fit.frames, "DN containers")->required();
    c_fit->add_option("--black-level", fit.black_level, "default: first frame's calibration");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e, out, err);
        report_error(err, "usage", e.what());
        return 2;
    }

    try {
        const auto ctx = make_context(g);
        if (*c_convert) return cmd_convert(convert, ctx, out);
        if (*c_augment) return cmd_augment(augment, ctx, out, err);
        if (*c_pair) return cmd_pair(pair, ctx, out);
        if (*c_sample) return cmd_sample_targets(sample, ctx, out);
        if (*c_partition) return cmd_partition(partition, ctx, out);
        if (*c_eval) return cmd_eval(eval, ctx, out);
        if (*c_ablation) return cmd_ablation(ablation, ctx, out);
        if (*c_fit) return cmd_fit_noise(fit, ctx, out);
    } catch (const Error& e) {
        report_error(err, e.kind(), e.what());
        return 1;
    } catch (const std::exception& e) {
        report_error(err, "internal", e.what());
        return 1;
    }
    return 1;
}

}  // namespace rawnight::cli

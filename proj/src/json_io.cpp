#include "rawnight/json_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "rawnight/errors.hpp"

namespace rawnight {

using nlohmann::json;

namespace {

json optional_number(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_optional(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
}

template <class F>
auto input_guard(std::string_view what, F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw InputError("invalid " + std::string(what) + ": " + e.what());
    }
}

}  // namespace

void to_json(json& j, const SensorCalibration& c) {
    j = json{{"gain", c.gain},
             {"black_level", c.black_level},
             {"read_noise_dn", c.read_noise_dn},
             {"iso", c.iso}};
}

void from_json(const json& j, SensorCalibration& c) {
    c.gain = j.at("gain").get<double>();
    c.black_level = j.value("black_level", 0.0);
    c.read_noise_dn = j.value("read_noise_dn", 0.0);
    c.iso = j.value("iso", 100);
}

void to_json(json& j, const BBox& b) { j = json::array({b.x, b.y, b.w, b.h}); }

void from_json(const json& j, BBox& b) {
    if (!j.is_array() || j.size() != 4) {
        throw InputError("bbox must be an array [x, y, w, h]");
    }
    b = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

std::uint64_t seed_from_json(const json& j) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0) {
        return static_cast<std::uint64_t>(j.get<std::int64_t>());
    }
    if (j.is_string()) {
        const auto& s = j.get_ref<const std::string&>();
        std::size_t used = 0;
        try {
            const auto v = std::stoull(s, &used, 10);
            if (used == s.size() && !s.empty() && s[0] != '-') return v;
        } catch (const std::exception&) {
        }
    }
    throw InputError("seed must be an unsigned 64-bit decimal, got " + j.dump());
}

void to_json(json& j, const ThinningSpec& spec) {
    j = json{{"k", spec.k},
             {"mode", std::string(to_string(spec.mode))},
             {"src_calib", spec.src_calib},
             {"dst_calib", spec.dst_calib},
             {"seed", spec.seed}};
}

void from_json(const json& j, ThinningSpec& spec) {
    spec.k = j.at("k").get<double>();
    spec.mode = parse_thin_mode(j.at("mode").get<std::string>());
    spec.src_calib = j.at("src_calib").get<SensorCalibration>();
    spec.dst_calib = j.at("dst_calib").get<SensorCalibration>();
    spec.seed = seed_from_json(j.at("seed"));
}

json gain_policy_to_json(const GainPolicy& policy) {
    if (std::holds_alternative<KeepCalibration>(policy)) return json{{"type", "keep"}};
    if (std::holds_alternative<PreserveDnMagnitude>(policy)) {
        return json{{"type", "preserve_dn_magnitude"}};
    }
    return json{{"type", "match_iso"}, {"iso", std::get<MatchIso>(policy).target_iso}};
}

GainPolicy gain_policy_from_json(const json& j) {
    const auto type = j.at("type").get<std::string>();
    if (type == "keep") return KeepCalibration{};
    if (type == "preserve_dn_magnitude") return PreserveDnMagnitude{};
    if (type == "match_iso") return MatchIso{j.at("iso").get<int>()};
    throw ConfigError("unknown gain policy '" + type + "'");
}

void check_schema_version(const json& doc, std::string_view what) {
    if (doc.is_object() && doc.contains("schema_version")) {
        const auto& v = doc.at("schema_version");
        if (!v.is_number_integer() || v.get<int>() != kSchemaVersion) {
            throw InputError("unsupported " + std::string(what) + " schema_version " + v.dump());
        }
    }
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "'");
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw IoError("'" + path.string() + "' is not valid JSON: " + e.what(),
                      e.byte > 0 ? e.byte - 1 : 0);
    }
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
    const std::string text = doc.dump(2) + "\n";
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    out << text;
}

AnnotationSet annotations_from_json(const json& doc) {
    check_schema_version(doc, "annotations");
    return input_guard("annotations", [&] {
        AnnotationSet set;
        for (const auto& img : doc.at("images")) {
            ImageRecord r;
            r.id = img.at("id").is_string() ? img.at("id").get<std::string>()
                                            : img.at("id").dump();
            r.file = img.value("file", std::string());
            r.width = img.value("width", std::size_t{0});
            r.height = img.value("height", std::size_t{0});
            r.iso = img.value("iso", 100);
            r.light_condition =
                parse_light_condition(img.value("light_condition", std::string("normal")));
            set.images.push_back(std::move(r));
        }
        for (const auto& ann : doc.at("annotations")) {
            Instance inst;
            inst.id = ann.at("id").is_string() ? ann.at("id").get<std::string>()
                                               : ann.at("id").dump();
            inst.image_id = ann.at("image_id").is_string()
                                ? ann.at("image_id").get<std::string>()
                                : ann.at("image_id").dump();
            inst.category = ann.value("category", std::string("person"));
            inst.bbox = ann.at("bbox").get<BBox>();
            if (ann.contains("electron_mean") && !ann.at("electron_mean").is_null()) {
                inst.electron_mean = ann.at("electron_mean").get<double>();
            }
            const auto& img = set.image(inst.image_id);
            inst.iso = img.iso;
            inst.light_condition = img.light_condition;
            set.instances.push_back(std::move(inst));
        }
        set.validate();
        return set;
    });
}

json annotations_to_json(const AnnotationSet& set) {
    json images = json::array();
    for (const auto& r : set.images) {
        images.push_back({{"id", r.id},
                          {"file", r.file},
                          {"width", r.width},
                          {"height", r.height},
                          {"iso", r.iso},
                          {"light_condition", std::string(to_string(r.light_condition))}});
    }
    json anns = json::array();
    for (const auto& inst : set.instances) {
        json a = {{"id", inst.id},
                  {"image_id", inst.image_id},
                  {"category", inst.category},
                  {"bbox", inst.bbox},
                  {"area", inst.area()}};
        if (inst.electron_mean) a["electron_mean"] = *inst.electron_mean;
        anns.push_back(std::move(a));
    }
    return {{"schema_version", kSchemaVersion}, {"images", images}, {"annotations", anns}};
}

std::vector<Detection> detections_from_json(const json& doc) {
    check_schema_version(doc, "detections");
    return input_guard("detections", [&] {
        const json& list = doc.is_array() ? doc : doc.at("detections");
        std::vector<Detection> out;
        for (const auto& d : list) {
            Detection det;
            det.image_id = d.at("image_id").is_string() ? d.at("image_id").get<std::string>()
                                                        : d.at("image_id").dump();
            det.category = d.value("category", std::string("person"));
            det.bbox = d.at("bbox").get<BBox>();
            det.score = d.at("score").get<double>();
            if (!(det.bbox.w > 0.0) || !(det.bbox.h > 0.0)) {
                throw InputError("detection on '" + det.image_id + "' has non-positive extent");
            }
            if (!(det.score >= 0.0) || !(det.score <= 1.0)) {
                throw InputError("detection score must lie in [0, 1]");
            }
            if (d.contains("electron_mean") && !d.at("electron_mean").is_null()) {
                det.electron_mean = d.at("electron_mean").get<double>();
            }
            out.push_back(std::move(det));
        }
        return out;
    });
}

json detections_to_json(const std::vector<Detection>& dets) {
    json list = json::array();
    for (const auto& d : dets) {
        json j = {{"image_id", d.image_id},
                  {"category", d.category},
                  {"bbox", d.bbox},
                  {"score", d.score}};
        if (d.electron_mean) j["electron_mean"] = *d.electron_mean;
        list.push_back(std::move(j));
    }
    return {{"schema_version", kSchemaVersion}, {"detections", list}};
}

json jobs_to_json(const std::vector<AugmentationJob>& jobs, std::uint64_t master_seed) {
    json list = json::array();
    for (const auto& job : jobs) {
        list.push_back({{"job_id", job.job_id},
                        {"instance_id", job.instance_id},
                        {"image_id", job.image_id},
                        {"source_file", job.source_file},
                        {"bbox", job.bbox},
                        {"source_electron_mean", job.source_electron_mean},
                        {"target", job.target},
                        {"k", job.k},
                        {"seed", job.seed},
                        {"mode", std::string(to_string(job.mode))},
                        {"gain_policy", gain_policy_to_json(job.gain_policy)}});
    }
    return {{"schema_version", kSchemaVersion}, {"master_seed", master_seed}, {"jobs", list}};
}

std::vector<AugmentationJob> jobs_from_json(const json& doc) {
    check_schema_version(doc, "job list");
    return input_guard("job list", [&] {
        std::vector<AugmentationJob> jobs;
        for (const auto& j : doc.at("jobs")) {
            AugmentationJob job;
            job.job_id = j.at("job_id").get<std::string>();
            job.instance_id = j.value("instance_id", std::string());
            job.image_id = j.value("image_id", std::string());
            job.source_file = j.at("source_file").get<std::string>();
            job.bbox = j.at("bbox").get<BBox>();
            job.source_electron_mean = j.value("source_electron_mean", 0.0);
            job.target = j.value("target", 0.0);
            job.k = j.at("k").get<double>();
            if (!j.contains("seed")) {
                throw JobError("job '" + job.job_id + "' has no seed");
            }
            job.seed = seed_from_json(j.at("seed"));
            job.mode = parse_thin_mode(j.value("mode", std::string("noise_aware_gaussian")));
            if (j.contains("gain_policy")) {
                job.gain_policy = gain_policy_from_json(j.at("gain_policy"));
            }
            jobs.push_back(std::move(job));
        }
        return jobs;
    });
}

json partition_to_json(const IntervalPartition& p) {
    return {{"schema_version", kSchemaVersion},
            {"boundaries", p.boundaries},
            {"counts", p.counts},
            {"degenerate_ties", p.degenerate_ties}};
}

IntervalPartition partition_from_json(const json& doc) {
    check_schema_version(doc, "partition");
    return input_guard("partition", [&] {
        IntervalPartition p;
        p.boundaries = doc.at("boundaries").get<std::vector<double>>();
        if (p.boundaries.size() < 2) {
            throw PartitionError("a partition needs at least two boundaries");
        }
        for (std::size_t i = 1; i < p.boundaries.size(); ++i) {
            if (p.boundaries[i] < p.boundaries[i - 1]) {
                throw PartitionError("partition boundaries must be ascending");
            }
        }
        p.counts = doc.value("counts", std::vector<std::size_t>(p.size(), 0));
        p.degenerate_ties = doc.value("degenerate_ties", false);
        return p;
    });
}

json pairing_to_json(const Pairing& p) {
    json pairs = json::array();
    for (const auto& [a, b] : p.pairs) pairs.push_back({{"a", a}, {"b", b}});
    return {{"schema_version", kSchemaVersion},
            {"pairs", pairs},
            {"total_area_gap", p.total_area_gap}};
}

json complementary_to_json(const std::vector<ComplementaryBin>& bins) {
    json list = json::array();
    for (const auto& b : bins) {
        list.push_back({{"bin", b.bin},
                        {"lo", b.lo},
                        {"hi", b.hi},
                        {"count", b.count},
                        {"deficit", b.deficit},
                        {"targets", b.targets}});
    }
    return {{"schema_version", kSchemaVersion}, {"bins", list}};
}

json noise_fit_to_json(const NoiseFit& fit) {
    return {{"schema_version", kSchemaVersion},
            {"gain_est", fit.gain_est},
            {"read_noise_est", fit.read_noise_est},
            {"residual", fit.residual},
            {"slope", fit.slope},
            {"intercept", fit.intercept},
            {"intercept_clamped", fit.intercept_clamped},
            {"signal_independent", fit.signal_independent}};
}

json eval_config_to_json(const EvalConfig& c) {
    return {{"score_thr", c.score_thr},
            {"iou_thresholds", c.iou_thresholds},
            {"ap_mode", std::string(to_string(c.ap_mode))}};
}

EvalConfig eval_config_from_json(const json& j) {
    EvalConfig c;
    try {
        c.score_thr = j.value("score_thr", c.score_thr);
        if (j.contains("iou_thresholds")) {
            c.iou_thresholds = j.at("iou_thresholds").get<std::vector<double>>();
        }
        c.ap_mode = parse_ap_mode(j.value("ap_mode", std::string("continuous")));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid eval config: ") + e.what());
    }
    c.validate();
    return c;
}

json map_result_to_json(const MapResult& r) {
    json aps = json::array();
    for (std::size_t i = 0; i < r.aps.size(); ++i) {
        aps.push_back({{"iou", r.iou_thresholds[i]}, {"ap", optional_number(r.aps[i])}});
    }
    return {{"map", optional_number(r.map)}, {"aps", aps}};
}

json binned_report_to_json(const BinnedReport& report) {
    json intervals = json::array();
    for (const auto& iv : report.intervals) {
        json aps = json::array();
        for (std::size_t t = 0; t < iv.aps.size(); ++t) {
            aps.push_back({{"iou", report.config.iou_thresholds[t]},
                           {"ap", optional_number(iv.aps[t])}});
        }
        intervals.push_back({{"index", iv.index},
                             {"lo", iv.lo},
                             {"hi", iv.hi},
                             {"gt_count", iv.gt_count},
                             {"detection_count", iv.detection_count},
                             {"tp50", iv.tp50},
                             {"fp50", iv.fp50},
                             {"fn50", iv.fn50},
                             {"aps", aps},
                             {"map", optional_number(iv.map)}});
    }
    return {{"schema_version", kSchemaVersion},
            {"config", eval_config_to_json(report.config)},
            {"config_hash", report.config_hash},
            {"seed", report.seed},
            {"excluded_gt", report.excluded_gt},
            {"excluded_detections", report.excluded_detections},
            {"fp_placement", "own_bbox_electron_mean"},
            {"intervals", intervals}};
}

std::string binned_report_to_csv(const BinnedReport& report) {
    std::ostringstream out;
    out << "interval,lo,hi,gt_count,tp50,fp50,fn50,iou_threshold,ap,map\n";
    for (const auto& iv : report.intervals) {
        for (std::size_t t = 0; t < iv.aps.size(); ++t) {
            out << iv.index << ',' << format_double(iv.lo) << ',' << format_double(iv.hi) << ','
                << iv.gt_count << ',' << iv.tp50 << ',' << iv.fp50 << ',' << iv.fn50 << ','
                << format_double(report.config.iou_thresholds[t]) << ','
                << format_optional(iv.aps[t]) << ',' << format_optional(iv.map) << '\n';
        }
    }
    return out.str();
}

}  // namespace rawnight

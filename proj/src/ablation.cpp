#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "rawnight/container.hpp"
#include "rawnight/errors.hpp"
#include "rawnight/json_io.hpp"
#include "rawnight/pipeline.hpp"

namespace rawnight {

using nlohmann::json;

namespace {

struct EvalSet {
    std::vector<Instance> gts;
    std::vector<Detection> dets;
};

MetricSummary summarize(const std::vector<double>& values) {
    MetricSummary s;
    if (values.empty()) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return s;
}

ArmSummary summarize_arm(const std::vector<const MapResult*>& results) {
    ArmSummary arm;
    std::vector<double> maps;
    for (const auto* r : results) maps.push_back(r->map.value_or(0.0));
    arm.map = summarize(maps);
    const std::size_t n_thr = results.empty() ? 0 : results.front()->aps.size();
    for (std::size_t t = 0; t < n_thr; ++t) {
        std::vector<double> aps;
        for (const auto* r : results) aps.push_back(r->aps[t].value_or(0.0));
        arm.aps.push_back(summarize(aps));
    }
    return arm;
}

json summary_to_json(const ArmSummary& arm, const EvalConfig& eval) {
    json aps = json::array();
    for (std::size_t t = 0; t < arm.aps.size(); ++t) {
        aps.push_back({{"iou", eval.iou_thresholds[t]},
                       {"mean", arm.aps[t].mean},
                       {"sd", arm.aps[t].sd}});
    }
    return {{"map", {{"mean", arm.map.mean}, {"sd", arm.map.sd}}}, {"aps", aps}};
}

void validate_runs(const AnnotationSet& annotations, const std::vector<AblationRunSpec>& runs) {
    if (runs.empty()) {
        throw ValidationError("ablation needs at least one run");
    }
    std::set<std::string> seen;
    for (std::size_t r = 0; r < runs.size(); ++r) {
        if (runs[r].set_a.empty() || runs[r].set_b.empty()) {
            throw ValidationError("run " + std::to_string(r) + " has an empty set");
        }
        for (const auto* set : {&runs[r].set_a, &runs[r].set_b}) {
            for (const auto& id : *set) {
                try {
                    annotations.instance(id);
                } catch (const InputError& e) {
                    throw ValidationError("run " + std::to_string(r) + ": " + e.what());
                }
                if (!seen.insert(id).second) {
                    throw ValidationError("instance '" + id + "' appears in more than one set; "
                                          "ablation sets must be disjoint across all runs");
                }
            }
        }
    }
}

std::vector<Instance> lookup(const AnnotationSet& annotations, const std::vector<std::string>& ids) {
    std::vector<Instance> out;
    for (const auto& id : ids) {
        out.push_back(annotations.instance(id));
        if (!out.back().electron_mean) {
            throw InputError("instance '" + id + "' has no electron mean");
        }
    }
    return out;
}

std::string job_id(std::size_t run, const char* arm, std::size_t index) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "run%02zu-%s-%05zu", run, arm, index);
    return buf;
}

}  // namespace

std::vector<AblationRunSpec> ablation_runs_from_json(const json& doc) {
    check_schema_version(doc, "ablation runs");
    try {
        std::vector<AblationRunSpec> runs;
        for (const auto& r : doc.at("runs")) {
            AblationRunSpec spec;
            spec.set_a = r.at("set_a").get<std::vector<std::string>>();
            spec.set_b = r.at("set_b").get<std::vector<std::string>>();
            runs.push_back(std::move(spec));
        }
        return runs;
    } catch (const json::exception& e) {
        throw InputError(std::string("invalid ablation runs: ") + e.what());
    }
}

json ablation_report_to_json(const AblationReport& report) {
    json runs = json::array();
    for (std::size_t r = 0; r < report.runs.size(); ++r) {
        const auto& run = report.runs[r];
        runs.push_back({{"run", r},
                        {"pairing", pairing_to_json(run.pairing)},
                        {"metrics",
                         {{"real", map_result_to_json(run.real)},
                          {"noise_aware", map_result_to_json(run.noise_aware)},
                          {"naive", map_result_to_json(run.naive)}}}});
    }
    return {{"schema_version", kSchemaVersion},
            {"master_seed", report.master_seed},
            {"config_hash", report.config_hash},
            {"detector", report.detector},
            {"eval", eval_config_to_json(report.eval)},
            {"single_run", report.single_run},
            {"runs", runs},
            {"summary",
             {{"real", summary_to_json(report.real, report.eval)},
              {"noise_aware", summary_to_json(report.noise_aware, report.eval)},
              {"naive", summary_to_json(report.naive, report.eval)}}}};
}

AblationOutcome run_ablation(const AnnotationSet& annotations,
                             const std::vector<AblationRunSpec>& runs, const Detector& detector,
                             const AblationOptions& options) {
    validate_runs(annotations, runs);
    options.eval.validate();

    // Plan every job first so one worker pool covers all runs.
    std::vector<AugmentationJob> jobs;
    std::vector<Pairing> pairings;
    std::vector<std::vector<std::pair<Instance, Instance>>> pairs_per_run;
    std::ostringstream offenders;
    std::size_t n_offenders = 0;
    for (std::size_t r = 0; r < runs.size(); ++r) {
        const auto set_a = lookup(annotations, runs[r].set_a);
        const auto set_b = lookup(annotations, runs[r].set_b);
        auto pairing = pair_by_area(set_a, set_b);
        std::vector<std::pair<Instance, Instance>> pairs;
        for (std::size_t i = 0; i < pairing.pairs.size(); ++i) {
            const auto& a = annotations.instance(pairing.pairs[i].first);
            const auto& b = annotations.instance(pairing.pairs[i].second);
            if (*b.electron_mean > *a.electron_mean || !(*b.electron_mean > 0.0)) {
                offenders << (n_offenders++ ? ", " : "") << a.id << "->" << b.id;
                continue;
            }
            const double target = *b.electron_mean;
            const std::string key =
                "run" + std::to_string(r) + ":" + a.id + ">" + b.id;
            for (const auto mode : {options.noise_mode, ThinMode::Naive}) {
                AugmentationJob job;
                job.job_id = job_id(r, mode == ThinMode::Naive ? "naive" : "aware", i);
                job.instance_id = a.id;
                job.image_id = a.image_id;
                job.source_file = annotations.image(a.image_id).file;
                job.bbox = a.bbox;
                job.source_electron_mean = *a.electron_mean;
                job.target = target;
                job.k = target / *a.electron_mean;
                job.seed = job_seed(options.master_seed, key, target);
                job.mode = mode;
                job.gain_policy = MatchIso{b.iso};
                jobs.push_back(std::move(job));
            }
            pairs.emplace_back(a, b);
        }
        pairings.push_back(std::move(pairing));
        pairs_per_run.push_back(std::move(pairs));
    }
    if (n_offenders > 0) {
        throw JobError("thinning cannot brighten; pairs with a darker source: " + offenders.str());
    }

    AugmentOptions aug;
    aug.out_dir = options.out_dir / "synthetic";
    aug.source_root = options.raster_root;
    aug.ladder = options.ladder;
    aug.workers = options.workers;
    aug.config_hash = options.config_hash;

    AblationOutcome outcome;
    outcome.manifest = run_augment(jobs, aug);
    std::map<std::string, const ManifestEntry*> entry_by_id;
    for (const auto& e : outcome.manifest.entries) {
        if (!e.ok) {
            throw JobError("ablation job " + e.job_id + " failed: " + e.error);
        }
        entry_by_id[e.job_id] = &e;
    }

    auto& report = outcome.report;
    report.master_seed = options.master_seed;
    report.config_hash = options.config_hash;
    report.detector = detector.name();
    report.eval = options.eval;
    report.single_run = runs.size() == 1;

    std::map<std::string, ElectronMap> real_cache;
    auto real_electrons = [&](const std::string& image_id) -> const ElectronMap& {
        auto it = real_cache.find(image_id);
        if (it == real_cache.end()) {
            const auto file = read_container(
                resolve_path(options.raster_root, annotations.image(image_id).file));
            it = real_cache.emplace(image_id, file.to_electrons()).first;
        }
        return it->second;
    };

    for (std::size_t r = 0; r < runs.size(); ++r) {
        AblationRunResult result;
        result.pairing = pairings[r];

        EvalSet real;
        std::map<std::string, std::vector<BBox>> b_boxes;
        for (const auto& [a, b] : pairs_per_run[r]) {
            real.gts.push_back(b);
            b_boxes[b.image_id].push_back(b.bbox);
        }
        for (const auto& [image_id, boxes] : b_boxes) {
            auto found = detector.detect({image_id, real_electrons(image_id), boxes});
            real.dets.insert(real.dets.end(), found.begin(), found.end());
        }

        EvalSet synthetic[2];
        const char* arms[2] = {"aware", "naive"};
        for (int arm = 0; arm < 2; ++arm) {
            for (std::size_t i = 0; i < pairs_per_run[r].size(); ++i) {
                const auto& [a, b] = pairs_per_run[r][i];
                // Indices follow the pairing order, including skipped pairs.
                std::size_t pair_index = 0;
                for (; pair_index < pairings[r].pairs.size(); ++pair_index) {
                    if (pairings[r].pairs[pair_index].first == a.id) break;
                }
                const auto id = job_id(r, arms[arm], pair_index);
                const auto* entry = entry_by_id.at(id);
                const auto file = read_container(aug.out_dir / entry->output_path);
                Instance gt = a;
                gt.image_id = id;
                gt.electron_mean = entry->realized_electron_mean;
                synthetic[arm].gts.push_back(gt);
                const BBox boxes[1] = {a.bbox};
                auto found = detector.detect({id, file.to_electrons(), boxes});
                synthetic[arm].dets.insert(synthetic[arm].dets.end(), found.begin(), found.end());
            }
        }

        result.real = mean_average_precision(real.dets, real.gts, options.eval);
        result.noise_aware =
            mean_average_precision(synthetic[0].dets, synthetic[0].gts, options.eval);
        result.naive = mean_average_precision(synthetic[1].dets, synthetic[1].gts, options.eval);
        report.runs.push_back(std::move(result));
    }

    std::vector<const MapResult*> real_results, aware_results, naive_results;
    for (const auto& run : report.runs) {
        real_results.push_back(&run.real);
        aware_results.push_back(&run.noise_aware);
        naive_results.push_back(&run.naive);
    }
    report.real = summarize_arm(real_results);
    report.noise_aware = summarize_arm(aware_results);
    report.naive = summarize_arm(naive_results);
    return outcome;
}

}  // namespace rawnight

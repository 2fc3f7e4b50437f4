#pragma once

// Batch orchestration: augmentation jobs and the real-vs-synthetic ablation.
// Jobs run on a bounded OpenMP worker pool; results are always ordered by job
// id and every job owns its seed, so the worker count never changes output.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rawnight/dataset.hpp"
#include "rawnight/detectors.hpp"
#include "rawnight/eval.hpp"
#include "rawnight/noise.hpp"

namespace rawnight {

// root / file unless file is absolute.
std::filesystem::path resolve_path(const std::filesystem::path& root, const std::string& file);

// Computes electron_mean for every instance that lacks one, from the image's
// container under raster_root.
void annotate_electron_means(AnnotationSet& set, const std::filesystem::path& raster_root);

struct AugmentOptions {
    std::filesystem::path out_dir;
    std::filesystem::path source_root;
    IsoLadder ladder;
    int workers = 1;
    std::string config_hash;
};

struct ManifestEntry {
    std::string job_id;
    std::string instance_id;
    bool ok = false;
    std::string error;
    double k = 0.0;
    ThinMode mode = ThinMode::NoiseAwareGaussian;
    std::string gain_policy;
    double target = 0.0;
    std::optional<double> realized_electron_mean;
    std::optional<double> standard_error;  ///< predicted SE of the realized mean
    std::string output_path;               ///< relative to the output directory
};

struct Manifest {
    std::string config_hash;
    std::vector<ManifestEntry> entries;

    bool all_ok() const;
};

nlohmann::json manifest_to_json(const Manifest& manifest);

/// Thins, re-gains and re-digitizes each job's source frame into
/// out_dir/<job_id>.rnc. Failures are recorded per entry, not thrown; a list
/// with duplicate job ids is rejected up front with JobError.
Manifest run_augment(const std::vector<AugmentationJob>& jobs, const AugmentOptions& options);

struct AblationRunSpec {
    std::vector<std::string> set_a;  ///< bright sources
    std::vector<std::string> set_b;  ///< real low-light targets
};

std::vector<AblationRunSpec> ablation_runs_from_json(const nlohmann::json& doc);

struct AblationOptions {
    std::uint64_t master_seed = 0;
    IsoLadder ladder;
    EvalConfig eval;
    int workers = 1;
    std::filesystem::path out_dir;
    std::filesystem::path raster_root;
    ThinMode noise_mode = ThinMode::NoiseAwareGaussian;
    std::string config_hash;
};

struct AblationRunResult {
    Pairing pairing;
    MapResult real;         ///< set B
    MapResult noise_aware;  ///< set C
    MapResult naive;        ///< set C~
};

struct MetricSummary {
    double mean = 0.0;
    double sd = 0.0;  ///< sample standard deviation; 0 for a single run
};

struct ArmSummary {
    MetricSummary map;
    std::vector<MetricSummary> aps;
};

struct AblationReport {
    std::uint64_t master_seed = 0;
    std::string config_hash;
    std::string detector;
    EvalConfig eval;
    std::vector<AblationRunResult> runs;
    ArmSummary real;
    ArmSummary noise_aware;
    ArmSummary naive;
    bool single_run = false;
};

nlohmann::json ablation_report_to_json(const AblationReport& report);

struct AblationOutcome {
    AblationReport report;
    Manifest manifest;
};

/**
 * For each run: pair A to B by area, darken every a_i to b_i's electron mean
 * twice (noise-aware with b_i's ISO calibration, and naive scaling re-digitized
 * at the same gain), run the detector on B, C and C~, and evaluate each set.
 *
 * Throws ValidationError when sets overlap anywhere across runs or reference
 * unknown instances, and JobError when some a_i is darker than its b_i.
 */
AblationOutcome run_ablation(const AnnotationSet& annotations,
                             const std::vector<AblationRunSpec>& runs, const Detector& detector,
                             const AblationOptions& options);

}  // namespace rawnight

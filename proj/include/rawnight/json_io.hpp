#pragma once

// JSON documents exchanged with other tools. Every top-level document carries
// "schema_version": 1. Seeds are unsigned 64-bit decimal numbers; readers also
// accept them as decimal strings.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "rawnight/dataset.hpp"
#include "rawnight/eval.hpp"
#include "rawnight/noise.hpp"
#include "rawnight/raw_core.hpp"

namespace rawnight {

inline constexpr int kSchemaVersion = 1;

void to_json(nlohmann::json& j, const SensorCalibration& c);
void from_json(const nlohmann::json& j, SensorCalibration& c);

void to_json(nlohmann::json& j, const BBox& b);
void from_json(const nlohmann::json& j, BBox& b);

void to_json(nlohmann::json& j, const ThinningSpec& spec);
void from_json(const nlohmann::json& j, ThinningSpec& spec);

nlohmann::json gain_policy_to_json(const GainPolicy& policy);
GainPolicy gain_policy_from_json(const nlohmann::json& j);

std::uint64_t seed_from_json(const nlohmann::json& j);

// Throws InputError when a document declares a schema_version other than 1.
void check_schema_version(const nlohmann::json& doc, std::string_view what);

nlohmann::json read_json_file(const std::filesystem::path& path);
// Pretty-printed with sorted keys and a trailing newline; byte-stable.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);

// Annotations: {images: [...], annotations: [...]} with bbox [x, y, w, h].
AnnotationSet annotations_from_json(const nlohmann::json& doc);
nlohmann::json annotations_to_json(const AnnotationSet& set);

// Detections: a bare array or {"detections": [...]}.
std::vector<Detection> detections_from_json(const nlohmann::json& doc);
nlohmann::json detections_to_json(const std::vector<Detection>& dets);

nlohmann::json jobs_to_json(const std::vector<AugmentationJob>& jobs, std::uint64_t master_seed);
std::vector<AugmentationJob> jobs_from_json(const nlohmann::json& doc);

nlohmann::json partition_to_json(const IntervalPartition& p);
IntervalPartition partition_from_json(const nlohmann::json& doc);

nlohmann::json pairing_to_json(const Pairing& p);
nlohmann::json complementary_to_json(const std::vector<ComplementaryBin>& bins);
nlohmann::json noise_fit_to_json(const NoiseFit& fit);
nlohmann::json eval_config_to_json(const EvalConfig& c);
EvalConfig eval_config_from_json(const nlohmann::json& j);
nlohmann::json map_result_to_json(const MapResult& r);

nlohmann::json binned_report_to_json(const BinnedReport& report);
// One row per interval x IOU threshold.
std::string binned_report_to_csv(const BinnedReport& report);

}  // namespace rawnight

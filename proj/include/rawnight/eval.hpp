#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rawnight/dataset.hpp"
#include "rawnight/geometry.hpp"

namespace rawnight {

struct Detection {
    std::string image_id;
    std::string category = "person";
    BBox bbox;
    double score = 0.0;
    // Needed only to place unmatched detections in multi-interval reports.
    std::optional<double> electron_mean;
};

enum class ApMode { Continuous, Point101 };

std::string_view to_string(ApMode mode);
ApMode parse_ap_mode(std::string_view text);

// {0.50, 0.55, ..., 0.95}, each the double nearest its decimal value.
std::vector<double> default_iou_thresholds();

struct EvalConfig {
    double score_thr = 0.50;
    std::vector<double> iou_thresholds = default_iou_thresholds();
    ApMode ap_mode = ApMode::Continuous;

    // Throws ConfigError unless thresholds are strictly ascending within (0, 1]
    // and score_thr lies in [0, 1].
    void validate() const;
};

double iou(const BBox& a, const BBox& b);

struct MatchEntry {
    std::size_t detection = 0;       ///< index into the input detections
    std::optional<std::size_t> gt;   ///< index into the input ground truth
    bool is_tp = false;
    double score = 0.0;
};

// Matching at one IOU threshold. Entries are in descending score order.
struct ThresholdMatch {
    double iou_thr = 0.5;
    std::vector<MatchEntry> entries;
    std::vector<std::size_t> unmatched_gt;
    std::size_t n_gt = 0;

    std::size_t tp() const;
    std::size_t fp() const { return entries.size() - tp(); }
    std::size_t fn() const { return unmatched_gt.size(); }
};

struct MatchResult {
    std::vector<ThresholdMatch> per_threshold;
};

/// Greedy score-ordered matching on each image.
///
/// Detections below score_thr are dropped. The rest are visited by score
/// (input order breaks ties) and each takes the unmatched GT on its image with
/// the highest IOU >= iou_thr (earlier GT wins IOU ties).
/// Throws InputError if detections and ground truth mix categories.
ThresholdMatch match_detections(std::span<const Detection> dets,
                                std::span<const Instance> gts, double iou_thr,
                                double score_thr);

MatchResult match_detections(std::span<const Detection> dets, std::span<const Instance> gts,
                             std::span<const double> iou_thresholds, double score_thr);

/// Area under the precision envelope, recall measured against all GT.
/// nullopt when there is no ground truth: the value is undefined, not zero.
std::optional<double> average_precision(const ThresholdMatch& match,
                                        ApMode mode = ApMode::Continuous);

struct MapResult {
    std::vector<double> iou_thresholds;
    std::vector<std::optional<double>> aps;
    std::optional<double> map;  ///< mean of aps; nullopt without ground truth
};

MapResult mean_average_precision(std::span<const Detection> dets,
                                 std::span<const Instance> gts, const EvalConfig& config = {});

struct IntervalReport {
    std::size_t index = 0;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t gt_count = 0;
    std::size_t detection_count = 0;
    std::size_t tp50 = 0;
    std::size_t fp50 = 0;
    std::size_t fn50 = 0;
    std::vector<std::optional<double>> aps;
    std::optional<double> map;
};

struct BinnedReport {
    EvalConfig config;
    std::vector<IntervalReport> intervals;
    std::size_t excluded_gt = 0;
    std::size_t excluded_detections = 0;
    std::uint64_t seed = 0;
    std::string config_hash;
};

/**
 * Per-illumination-interval metrics.
 *
 * Ground truth goes to the interval holding its electron mean; GT outside the
 * partition is counted in excluded_gt. A detection follows the GT it matches at
 * IOU 0.50. An unmatched detection is placed by its own electron mean, clamped
 * to the outer intervals; with a single interval no mean is needed.
 * Throws InputError for GT without an electron mean, or an unmatched detection
 * without one when the partition has several intervals.
 */
BinnedReport binned_evaluation(std::span<const Detection> dets, std::span<const Instance> gts,
                               const IntervalPartition& partition,
                               const EvalConfig& config = {});

}  // namespace rawnight

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rawnight/geometry.hpp"
#include "rawnight/noise.hpp"
#include "rawnight/raw_core.hpp"

namespace rawnight {

enum class LightCondition { Normal, Low };

std::string_view to_string(LightCondition c);
LightCondition parse_light_condition(std::string_view text);

struct ImageRecord {
    std::string id;
    std::string file;
    std::size_t width = 0;
    std::size_t height = 0;
    int iso = 100;
    LightCondition light_condition = LightCondition::Normal;
};

// A ground-truth object with its illumination statistic.
struct Instance {
    std::string id;
    std::string image_id;
    std::string category = "person";
    BBox bbox;
    std::optional<double> electron_mean;  ///< electrons, mean over the bbox
    int iso = 100;
    LightCondition light_condition = LightCondition::Normal;

    double area() const noexcept { return bbox.area(); }
};

struct AnnotationSet {
    std::vector<ImageRecord> images;
    std::vector<Instance> instances;

    const ImageRecord& image(std::string_view id) const;  // throws InputError
    const Instance& instance(std::string_view id) const;  // throws InputError

    // Throws InputError on duplicate ids, dangling image references, or boxes
    // outside their image.
    void validate() const;
};

/// Mean of the electron map over the pixels of bbox (signed values included).
/// Throws GeometryError when the box leaves the map.
double instance_electron_mean(const ElectronMap& map, const BBox& bbox);

/**
 * Contiguous illumination intervals [b_i, b_{i+1}); the last one is closed.
 *
 * Built by equal_tp_partition the counts differ by at most one unless tied
 * values straddle a quota edge; then the ties stay in the lower bin and
 * degenerate_ties is set.
 */
struct IntervalPartition {
    std::vector<double> boundaries;
    std::vector<std::size_t> counts;
    bool degenerate_ties = false;

    std::size_t size() const noexcept {
        return boundaries.empty() ? 0 : boundaries.size() - 1;
    }
    double lower(std::size_t i) const { return boundaries[i]; }
    double upper(std::size_t i) const { return boundaries[i + 1]; }

    // Interval holding value, or nullopt outside [front, back].
    std::optional<std::size_t> interval_of(double value) const;

    // Throws PartitionError unless boundaries has >= 2 non-decreasing finite entries.
    static IntervalPartition from_boundaries(std::vector<double> boundaries);
};

IntervalPartition equal_tp_partition(std::span<const double> values, std::size_t n_bins);

// Intervals around log-spaced targets, split at geometric midpoints and padded
// by half a step at both ends.
IntervalPartition partition_around_targets(std::span<const double> targets);

/// t_i = lo (hi/lo)^(i/(n-1)), i = 0..n-1. Throws DomainError unless 0 < lo < hi, n >= 2.
std::vector<double> log_uniform_targets(double lo, double hi, std::size_t n);

struct Pairing {
    std::vector<std::pair<std::string, std::string>> pairs;  ///< (a id, b id)
    double total_area_gap = 0.0;
};

/// Area-matched pairing minimizing sum |area_a - area_b|.
///
/// Equal sizes: both sides sorted by (area, id) and paired by rank. Unequal
/// sizes: the smaller side is matched into the larger by dynamic programming
/// over the sorted orders (an optimal 1-D matching never crosses).
Pairing pair_by_area(std::span<const Instance> set_a, std::span<const Instance> set_b);

struct ComplementaryBin {
    std::size_t bin = 0;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
    std::size_t deficit = 0;
    std::vector<double> targets;
};

/// Fills every log-uniform bin over [lo, hi] up to target_per_bin (nullopt = max count).
/// Emitted targets are log-uniform inside their bin and depend only on seed.
std::vector<ComplementaryBin> complementary_targets(std::span<const double> existing,
                                                    double lo, double hi, std::size_t n_bins,
                                                    std::optional<std::size_t> target_per_bin,
                                                    std::uint64_t seed);

struct AugmentationJob {
    std::string job_id;
    std::string instance_id;
    std::string image_id;
    std::string source_file;  ///< filled from the annotation set when known
    BBox bbox;
    double source_electron_mean = 0.0;
    double target = 0.0;
    double k = 1.0;
    std::uint64_t seed = 0;
    ThinMode mode = ThinMode::NoiseAwareGaussian;
    GainPolicy gain_policy = KeepCalibration{};
};

std::uint64_t job_seed(std::uint64_t master_seed, std::string_view source_id, double target);

/// One job per (source, target), sources outer. Throws JobError listing every
/// source whose electron mean is missing or below a target.
std::vector<AugmentationJob> build_synthetic_sweep(std::span<const Instance> sources,
                                                   std::span<const double> targets,
                                                   std::uint64_t master_seed,
                                                   ThinMode mode = ThinMode::NoiseAwareGaussian,
                                                   const GainPolicy& policy = KeepCalibration{});

// Copies image file paths from the annotation set into the jobs.
void resolve_sources(std::vector<AugmentationJob>& jobs, const AnnotationSet& annotations);

}  // namespace rawnight

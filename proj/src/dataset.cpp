#include "rawnight/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "rawnight/errors.hpp"
#include "rawnight/kernels.hpp"
#include "rawnight/rng.hpp"

namespace rawnight {

std::string_view to_string(LightCondition c) {
    return c == LightCondition::Low ? "low" : "normal";
}

LightCondition parse_light_condition(std::string_view text) {
    if (text == "normal") return LightCondition::Normal;
    if (text == "low") return LightCondition::Low;
    throw InputError("unknown light condition '" + std::string(text) + "'");
}

const ImageRecord& AnnotationSet::image(std::string_view id) const {
    for (const auto& img : images) {
        if (img.id == id) return img;
    }
    throw InputError("unknown image id '" + std::string(id) + "'");
}

const Instance& AnnotationSet::instance(std::string_view id) const {
    for (const auto& inst : instances) {
        if (inst.id == id) return inst;
    }
    throw InputError("unknown instance id '" + std::string(id) + "'");
}

void AnnotationSet::validate() const {
    std::set<std::string_view> image_ids;
    for (const auto& img : images) {
        if (!image_ids.insert(img.id).second) {
            throw InputError("duplicate image id '" + img.id + "'");
        }
    }
    std::set<std::string_view> instance_ids;
    for (const auto& inst : instances) {
        if (!instance_ids.insert(inst.id).second) {
            throw InputError("duplicate annotation id '" + inst.id + "'");
        }
        const auto& img = image(inst.image_id);
        if (!(inst.bbox.w > 0.0) || !(inst.bbox.h > 0.0)) {
            throw InputError("annotation '" + inst.id + "' has a non-positive box extent");
        }
        if (img.width > 0 && img.height > 0) {
            try {
                pixel_rect(inst.bbox, img.width, img.height);
            } catch (const GeometryError& e) {
                throw InputError("annotation '" + inst.id + "': " + e.what());
            }
        }
        if (inst.electron_mean && !std::isfinite(*inst.electron_mean)) {
            throw InputError("annotation '" + inst.id + "' has a non-finite electron mean");
        }
    }
}

double instance_electron_mean(const ElectronMap& map, const BBox& bbox) {
    const auto rect = pixel_rect(bbox, map.width(), map.height());
    return kernels::omp::box_sum(map.data(), map.width(), rect) /
           static_cast<double>(rect.count());
}

std::optional<std::size_t> IntervalPartition::interval_of(double value) const {
    if (size() == 0 || !(value >= boundaries.front()) || !(value <= boundaries.back())) {
        return std::nullopt;
    }
    const auto first = boundaries.begin() + 1;
    const auto last = boundaries.end() - 1;
    return static_cast<std::size_t>(std::upper_bound(first, last, value) - first);
}

IntervalPartition IntervalPartition::from_boundaries(std::vector<double> boundaries) {
    if (boundaries.size() < 2) {
        throw PartitionError("a partition needs at least two boundaries");
    }
    for (std::size_t i = 0; i < boundaries.size(); ++i) {
        if (!std::isfinite(boundaries[i])) {
            throw PartitionError("partition boundaries must be finite");
        }
        if (i > 0 && !(boundaries[i] > boundaries[i - 1])) {
            throw PartitionError("partition boundaries must be strictly ascending");
        }
    }
    IntervalPartition p;
    p.boundaries = std::move(boundaries);
    p.counts.assign(p.size(), 0);
    return p;
}

IntervalPartition equal_tp_partition(std::span<const double> values, std::size_t n_bins) {
    if (n_bins == 0) {
        throw PartitionError("need at least one bin");
    }
    if (values.size() < n_bins) {
        throw PartitionError("cannot split " + std::to_string(values.size()) +
                             " values into " + std::to_string(n_bins) + " bins");
    }
    std::vector<double> sorted(values.begin(), values.end());
    for (double v : sorted) {
        if (!std::isfinite(v)) {
            throw PartitionError("partition values must be finite");
        }
    }
    std::sort(sorted.begin(), sorted.end());

    const std::size_t n = sorted.size();
    const std::size_t base = n / n_bins;
    const std::size_t extra = n % n_bins;

    IntervalPartition p;
    p.boundaries.reserve(n_bins + 1);
    p.boundaries.push_back(sorted.front());

    std::size_t quota_edge = 0;
    std::size_t edge = 0;
    for (std::size_t j = 1; j < n_bins; ++j) {
        quota_edge += (j - 1 < extra) ? base + 1 : base;
        edge = std::max(edge, quota_edge);
        // Equal values straddling the edge all stay in the lower bin.
        while (edge < n && sorted[edge - 1] == sorted[edge]) {
            ++edge;
        }
        if (edge != quota_edge) {
            p.degenerate_ties = true;
        }
        double boundary;
        if (edge == n) {
            boundary = std::nextafter(sorted.back(), std::numeric_limits<double>::infinity());
        } else {
            const double lo = sorted[edge - 1];
            const double hi = sorted[edge];
            boundary = lo + (hi - lo) / 2.0;
            if (!(boundary > lo)) {
                boundary = hi;
            }
        }
        p.boundaries.push_back(std::max(boundary, p.boundaries.back()));
    }
    p.boundaries.push_back(std::max(sorted.back(), p.boundaries.back()));

    p.counts.assign(n_bins, 0);
    for (double v : sorted) {
        ++p.counts[*p.interval_of(v)];
    }
    return p;
}

IntervalPartition partition_around_targets(std::span<const double> targets) {
    if (targets.empty()) {
        throw PartitionError("need at least one target");
    }
    std::vector<double> t(targets.begin(), targets.end());
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(t[i] > 0.0) || !std::isfinite(t[i])) {
            throw PartitionError("targets must be positive and finite");
        }
        if (i > 0 && !(t[i] > t[i - 1])) {
            throw PartitionError("targets must be strictly ascending");
        }
    }
    std::vector<double> b;
    if (t.size() == 1) {
        b = {t[0] / 2.0, t[0] * 2.0};
    } else {
        b.push_back(t.front() / std::sqrt(t[1] / t[0]));
        for (std::size_t i = 0; i + 1 < t.size(); ++i) {
            b.push_back(std::sqrt(t[i] * t[i + 1]));
        }
        const std::size_t last = t.size() - 1;
        b.push_back(t.back() * std::sqrt(t[last] / t[last - 1]));
    }
    return IntervalPartition::from_boundaries(std::move(b));
}

std::vector<double> log_uniform_targets(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0) || !(hi > lo) || !std::isfinite(hi)) {
        throw DomainError("log-uniform targets need 0 < lo < hi, got lo=" +
                          std::to_string(lo) + " hi=" + std::to_string(hi));
    }
    if (n < 2) {
        throw DomainError("log-uniform targets need n >= 2");
    }
    std::vector<double> out(n);
    const double ratio = hi / lo;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = lo * std::pow(ratio, static_cast<double>(i) / static_cast<double>(n - 1));
    }
    out.front() = lo;
    out.back() = hi;
    return out;
}

Pairing pair_by_area(std::span<const Instance> set_a, std::span<const Instance> set_b) {
    if (set_a.empty() || set_b.empty()) {
        throw PairingError("pairing needs two non-empty sets");
    }
    auto sorted_order = [](std::span<const Instance> set) {
        std::vector<std::size_t> idx(set.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](std::size_t l, std::size_t r) {
            if (set[l].area() != set[r].area()) return set[l].area() < set[r].area();
            return set[l].id < set[r].id;
        });
        return idx;
    };
    const auto order_a = sorted_order(set_a);
    const auto order_b = sorted_order(set_b);

    Pairing out;
    auto emit = [&](std::size_t ia, std::size_t ib) {
        out.pairs.emplace_back(set_a[ia].id, set_b[ib].id);
        out.total_area_gap += std::abs(set_a[ia].area() - set_b[ib].area());
    };

    if (set_a.size() == set_b.size()) {
        for (std::size_t r = 0; r < order_a.size(); ++r) {
            emit(order_a[r], order_b[r]);
        }
        return out;
    }

    const bool a_small = set_a.size() < set_b.size();
    const auto& small_set = a_small ? set_a : set_b;
    const auto& large_set = a_small ? set_b : set_a;
    const auto& small_order = a_small ? order_a : order_b;
    const auto& large_order = a_small ? order_b : order_a;
    const std::size_t s = small_set.size();
    const std::size_t l = large_set.size();

    // cost[i][j]: best gap matching the first i small items into the first j large ones.
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> cost(s + 1, std::vector<double>(l + 1, kInf));
    for (std::size_t j = 0; j <= l; ++j) cost[0][j] = 0.0;
    for (std::size_t i = 1; i <= s; ++i) {
        for (std::size_t j = i; j <= l; ++j) {
            const double take = cost[i - 1][j - 1] +
                                std::abs(small_set[small_order[i - 1]].area() -
                                         large_set[large_order[j - 1]].area());
            cost[i][j] = std::min(cost[i][j - 1], take);
        }
    }
    std::vector<std::pair<std::size_t, std::size_t>> matched;
    for (std::size_t i = s, j = l; i > 0;) {
        if (j > i && cost[i][j] == cost[i][j - 1]) {
            --j;
            continue;
        }
        matched.emplace_back(small_order[i - 1], large_order[j - 1]);
        --i;
        --j;
    }
    std::reverse(matched.begin(), matched.end());
    for (const auto& [si, li] : matched) {
        if (a_small) {
            emit(si, li);
        } else {
            emit(li, si);
        }
    }
    return out;
}

std::vector<ComplementaryBin> complementary_targets(std::span<const double> existing,
                                                    double lo, double hi, std::size_t n_bins,
                                                    std::optional<std::size_t> target_per_bin,
                                                    std::uint64_t seed) {
    if (!(lo > 0.0) || !(hi > lo) || !std::isfinite(hi)) {
        throw DomainError("complementary targets need 0 < lo < hi");
    }
    if (n_bins == 0) {
        throw DomainError("complementary targets need at least one bin");
    }
    std::vector<double> edges(n_bins + 1);
    for (std::size_t i = 0; i <= n_bins; ++i) {
        edges[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n_bins));
    }
    edges.front() = lo;
    edges.back() = hi;

    std::vector<ComplementaryBin> bins(n_bins);
    for (std::size_t i = 0; i < n_bins; ++i) {
        bins[i].bin = i;
        bins[i].lo = edges[i];
        bins[i].hi = edges[i + 1];
    }
    for (double v : existing) {
        if (!(v >= lo) || !(v <= hi)) continue;
        const auto it = std::upper_bound(edges.begin() + 1, edges.end() - 1, v);
        ++bins[static_cast<std::size_t>(it - (edges.begin() + 1))].count;
    }

    std::size_t target = 0;
    if (target_per_bin) {
        target = *target_per_bin;
    } else {
        for (const auto& b : bins) target = std::max(target, b.count);
    }

    for (auto& b : bins) {
        b.deficit = b.count < target ? target - b.count : 0;
        const double log_span = std::log(b.hi / b.lo);
        for (std::size_t j = 0; j < b.deficit; ++j) {
            rng::Stream stream(rng::combine(seed, b.bin), j);
            double t = b.lo * std::exp(log_span * stream.uniform());
            t = std::clamp(t, b.lo, std::nextafter(b.hi, 0.0));
            b.targets.push_back(t);
        }
    }
    return bins;
}

std::uint64_t job_seed(std::uint64_t master_seed, std::string_view source_id, double target) {
    return rng::combine(rng::combine(master_seed, rng::hash_string(source_id)),
                        rng::hash_double(target));
}

std::vector<AugmentationJob> build_synthetic_sweep(std::span<const Instance> sources,
                                                   std::span<const double> targets,
                                                   std::uint64_t master_seed, ThinMode mode,
                                                   const GainPolicy& policy) {
    for (double t : targets) {
        if (!(t > 0.0) || !std::isfinite(t)) {
            throw JobError("targets must be positive and finite, got " + std::to_string(t));
        }
    }
    std::ostringstream offenders;
    std::size_t n_offenders = 0;
    for (const auto& src : sources) {
        if (!src.electron_mean) {
            offenders << (n_offenders++ ? ", " : "") << src.id << " (no electron mean)";
            continue;
        }
        for (double t : targets) {
            if (t > *src.electron_mean) {
                offenders << (n_offenders++ ? ", " : "") << src.id << " (mean "
                          << *src.electron_mean << " e < target " << t << " e)";
            }
        }
    }
    if (n_offenders > 0) {
        throw JobError("thinning cannot brighten; offending sources: " + offenders.str());
    }

    std::vector<AugmentationJob> jobs;
    jobs.reserve(sources.size() * targets.size());
    char id[32];
    for (const auto& src : sources) {
        for (double t : targets) {
            AugmentationJob job;
            std::snprintf(id, sizeof(id), "job-%06zu", jobs.size());
            job.job_id = id;
            job.instance_id = src.id;
            job.image_id = src.image_id;
            job.bbox = src.bbox;
            job.source_electron_mean = *src.electron_mean;
            job.target = t;
            job.k = t / *src.electron_mean;
            job.seed = job_seed(master_seed, src.id, t);
            job.mode = mode;
            job.gain_policy = policy;
            jobs.push_back(std::move(job));
        }
    }
    return jobs;
}

void resolve_sources(std::vector<AugmentationJob>& jobs, const AnnotationSet& annotations) {
    for (auto& job : jobs) {
        job.source_file = annotations.image(job.image_id).file;
    }
}

}  // namespace rawnight

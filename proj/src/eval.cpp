#include "rawnight/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "rawnight/errors.hpp"

namespace rawnight {

namespace {

constexpr double kAssignmentIou = 0.50;

void check_single_category(std::span<const Detection> dets, std::span<const Instance> gts) {
    const std::string* category = nullptr;
    auto check = [&](const std::string& c) {
        if (!category) {
            category = &c;
        } else if (*category != c) {
            throw InputError("mixed categories '" + *category + "' and '" + c +
                             "'; evaluate one category at a time");
        }
    };
    for (const auto& d : dets) check(d.category);
    for (const auto& g : gts) check(g.category);
}

// Indices of detections passing the score gate, by descending score then input order.
std::vector<std::size_t> ranked(std::span<const Detection> dets, double score_thr) {
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < dets.size(); ++i) {
        if (dets[i].score >= score_thr) order.push_back(i);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dets[a].score > dets[b].score;
    });
    return order;
}

ThresholdMatch match_ranked(std::span<const Detection> dets, std::span<const Instance> gts,
                            const std::vector<std::size_t>& order, double iou_thr) {
    std::map<std::string_view, std::vector<std::size_t>> gt_by_image;
    for (std::size_t g = 0; g < gts.size(); ++g) {
        gt_by_image[gts[g].image_id].push_back(g);
    }
    std::vector<bool> taken(gts.size(), false);

    ThresholdMatch out;
    out.iou_thr = iou_thr;
    out.n_gt = gts.size();
    out.entries.reserve(order.size());
    for (std::size_t d : order) {
        MatchEntry entry;
        entry.detection = d;
        entry.score = dets[d].score;
        const auto it = gt_by_image.find(dets[d].image_id);
        if (it != gt_by_image.end()) {
            double best = -1.0;
            for (std::size_t g : it->second) {
                if (taken[g]) continue;
                const double o = iou(dets[d].bbox, gts[g].bbox);
                if (o >= iou_thr && o > best) {
                    best = o;
                    entry.gt = g;
                }
            }
        }
        if (entry.gt) {
            taken[*entry.gt] = true;
            entry.is_tp = true;
        }
        out.entries.push_back(entry);
    }
    for (std::size_t g = 0; g < gts.size(); ++g) {
        if (!taken[g]) out.unmatched_gt.push_back(g);
    }
    return out;
}

}  // namespace

std::string_view to_string(ApMode mode) {
    return mode == ApMode::Point101 ? "101-point" : "continuous";
}

ApMode parse_ap_mode(std::string_view text) {
    if (text == "continuous") return ApMode::Continuous;
    if (text == "101-point") return ApMode::Point101;
    throw ConfigError("unknown AP mode '" + std::string(text) + "'");
}

std::vector<double> default_iou_thresholds() {
    std::vector<double> t;
    for (int percent = 50; percent <= 95; percent += 5) {
        t.push_back(static_cast<double>(percent) / 100.0);
    }
    return t;
}

void EvalConfig::validate() const {
    if (!(score_thr >= 0.0) || !(score_thr <= 1.0)) {
        throw ConfigError("score threshold must lie in [0, 1]");
    }
    if (iou_thresholds.empty()) {
        throw ConfigError("need at least one IOU threshold");
    }
    for (std::size_t i = 0; i < iou_thresholds.size(); ++i) {
        const double t = iou_thresholds[i];
        if (!(t > 0.0) || !(t <= 1.0)) {
            throw ConfigError("IOU thresholds must lie in (0, 1]");
        }
        if (i > 0 && !(t > iou_thresholds[i - 1])) {
            throw ConfigError("IOU thresholds must be strictly ascending");
        }
    }
}

double iou(const BBox& a, const BBox& b) {
    const double iw = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
    const double ih = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
    if (iw <= 0.0 || ih <= 0.0) {
        return 0.0;
    }
    const double inter = iw * ih;
    return inter / (a.area() + b.area() - inter);
}

std::size_t ThresholdMatch::tp() const {
    return static_cast<std::size_t>(
        std::count_if(entries.begin(), entries.end(), [](const auto& e) { return e.is_tp; }));
}

ThresholdMatch match_detections(std::span<const Detection> dets,
                                std::span<const Instance> gts, double iou_thr,
                                double score_thr) {
    check_single_category(dets, gts);
    if (!(iou_thr > 0.0) || !(iou_thr <= 1.0)) {
        throw InputError("IOU threshold must lie in (0, 1]");
    }
    return match_ranked(dets, gts, ranked(dets, score_thr), iou_thr);
}

MatchResult match_detections(std::span<const Detection> dets, std::span<const Instance> gts,
                             std::span<const double> iou_thresholds, double score_thr) {
    check_single_category(dets, gts);
    const auto order = ranked(dets, score_thr);
    MatchResult out;
    for (double t : iou_thresholds) {
        if (!(t > 0.0) || !(t <= 1.0)) {
            throw InputError("IOU threshold must lie in (0, 1]");
        }
        out.per_threshold.push_back(match_ranked(dets, gts, order, t));
    }
    return out;
}

std::optional<double> average_precision(const ThresholdMatch& match, ApMode mode) {
    if (match.n_gt == 0) {
        return std::nullopt;
    }
    const std::size_t n = match.entries.size();
    std::vector<double> precision(n);
    std::vector<std::size_t> tp_cum(n);
    std::size_t tp = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (match.entries[i].is_tp) ++tp;
        tp_cum[i] = tp;
        precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    }
    // Monotone envelope: best precision at this recall or any later one.
    for (std::size_t i = n; i-- > 1;) {
        precision[i - 1] = std::max(precision[i - 1], precision[i]);
    }

    const double n_gt = static_cast<double>(match.n_gt);
    if (mode == ApMode::Continuous) {
        double area = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (match.entries[i].is_tp) area += precision[i];
        }
        return area / n_gt;
    }

    // 101 recall samples; a sample beyond the reached recall contributes 0.
    double total = 0.0;
    std::size_t pos = 0;
    for (std::size_t t = 0; t <= 100; ++t) {
        while (pos < n && tp_cum[pos] * 100 < t * match.n_gt) ++pos;
        if (pos < n) total += precision[pos];
    }
    return total / 101.0;
}

MapResult mean_average_precision(std::span<const Detection> dets,
                                 std::span<const Instance> gts, const EvalConfig& config) {
    config.validate();
    const auto matches = match_detections(dets, gts, config.iou_thresholds, config.score_thr);
    MapResult out;
    out.iou_thresholds = config.iou_thresholds;
    double sum = 0.0;
    bool defined = true;
    for (const auto& m : matches.per_threshold) {
        const auto ap = average_precision(m, config.ap_mode);
        out.aps.push_back(ap);
        if (ap) {
            sum += *ap;
        } else {
            defined = false;
        }
    }
    if (defined) {
        out.map = sum / static_cast<double>(out.aps.size());
    }
    return out;
}

BinnedReport binned_evaluation(std::span<const Detection> dets, std::span<const Instance> gts,
                               const IntervalPartition& partition, const EvalConfig& config) {
    config.validate();
    check_single_category(dets, gts);
    const std::size_t n_intervals = partition.size();
    if (n_intervals == 0) {
        throw PartitionError("binned evaluation needs at least one interval");
    }

    BinnedReport report;
    report.config = config;

    std::vector<std::optional<std::size_t>> gt_interval(gts.size());
    for (std::size_t g = 0; g < gts.size(); ++g) {
        if (!gts[g].electron_mean) {
            throw InputError("ground truth '" + gts[g].id + "' has no electron mean");
        }
        gt_interval[g] = partition.interval_of(*gts[g].electron_mean);
        if (!gt_interval[g]) ++report.excluded_gt;
    }

    const auto order = ranked(dets, config.score_thr);
    const auto assignment = match_ranked(dets, gts, order, kAssignmentIou);

    std::vector<std::optional<std::size_t>> det_interval(dets.size());
    for (const auto& e : assignment.entries) {
        if (e.gt) {
            det_interval[e.detection] = gt_interval[*e.gt];
        } else if (n_intervals == 1) {
            det_interval[e.detection] = 0;
        } else {
            const auto& d = dets[e.detection];
            if (!d.electron_mean) {
                throw InputError("unmatched detection on image '" + d.image_id +
                                 "' has no electron mean to place it in an interval");
            }
            if (*d.electron_mean < partition.boundaries.front()) {
                det_interval[e.detection] = 0;
            } else if (*d.electron_mean > partition.boundaries.back()) {
                det_interval[e.detection] = n_intervals - 1;
            } else {
                det_interval[e.detection] = partition.interval_of(*d.electron_mean);
            }
        }
        if (!det_interval[e.detection]) ++report.excluded_detections;
    }

    for (std::size_t i = 0; i < n_intervals; ++i) {
        std::vector<Detection> idets;
        std::vector<Instance> igts;
        for (std::size_t d = 0; d < dets.size(); ++d) {
            if (det_interval[d] == i) idets.push_back(dets[d]);
        }
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (gt_interval[g] == i) igts.push_back(gts[g]);
        }

        IntervalReport r;
        r.index = i;
        r.lo = partition.lower(i);
        r.hi = partition.upper(i);
        r.gt_count = igts.size();
        r.detection_count = idets.size();
        const auto at50 = match_detections(idets, igts, kAssignmentIou, config.score_thr);
        r.tp50 = at50.tp();
        r.fp50 = at50.fp();
        r.fn50 = at50.fn();
        const auto metrics = mean_average_precision(idets, igts, config);
        r.aps = metrics.aps;
        r.map = metrics.map;
        report.intervals.push_back(std::move(r));
    }
    return report;
}

}  // namespace rawnight

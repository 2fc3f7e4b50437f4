#include <gtest/gtest.h>

#include <random>

#include "oracles/ap_oracle.hpp"
#include "oracles/matcher_oracle.hpp"
#include "rawnight/errors.hpp"
#include "rawnight/eval.hpp"

using namespace rawnight;

namespace {

Instance gt(const std::string& id, const std::string& image, BBox box,
            std::optional<double> mean = std::nullopt) {
    Instance i;
    i.id = id;
    i.image_id = image;
    i.bbox = box;
    i.electron_mean = mean;
    return i;
}

Detection det(const std::string& image, BBox box, double score,
              std::optional<double> mean = std::nullopt) {
    Detection d;
    d.image_id = image;
    d.bbox = box;
    d.score = score;
    d.electron_mean = mean;
    return d;
}

// GT boxes sit on a diagonal; a TP lands exactly on the next free GT and an
// FP lands far from everything.
struct PatternFixture {
    std::vector<Instance> gts;
    std::vector<Detection> dets;
};

PatternFixture from_pattern(const std::vector<bool>& pattern, std::size_t n_gt) {
    PatternFixture f;
    for (std::size_t g = 0; g < n_gt; ++g) {
        f.gts.push_back(gt("g" + std::to_string(g), "im", {g * 100.0, 0.0, 10.0, 10.0}));
    }
    std::size_t next = 0;
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        const double score = 0.99 - 0.01 * static_cast<double>(i);
        if (pattern[i]) {
            f.dets.push_back(det("im", {next++ * 100.0, 0.0, 10.0, 10.0}, score));
        } else {
            f.dets.push_back(det("im", {50.0 + i * 100.0, 500.0, 10.0, 10.0}, score));
        }
    }
    return f;
}

}  // namespace

TEST(Iou, Examples) {
    EXPECT_DOUBLE_EQ(iou({0, 0, 2, 2}, {0, 0, 2, 2}), 1.0);
    EXPECT_DOUBLE_EQ(iou({0, 0, 2, 2}, {5, 5, 2, 2}), 0.0);
    EXPECT_DOUBLE_EQ(iou({0, 0, 2, 2}, {1, 0, 2, 2}), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(iou({0, 0, 2, 2}, {2, 0, 2, 2}), 0.0);
}

TEST(DefaultThresholds, TenSteps) {
    const auto t = default_iou_thresholds();
    const std::vector<double> expected{0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95};
    EXPECT_EQ(t, expected);
    EXPECT_EQ(EvalConfig{}.score_thr, 0.50);
}

TEST(EvalConfig, Validation) {
    EvalConfig c;
    c.iou_thresholds = {0.5, 0.5};
    EXPECT_THROW(c.validate(), ConfigError);
    c.iou_thresholds = {0.0};
    EXPECT_THROW(c.validate(), ConfigError);
    c.iou_thresholds = {0.5, 1.0};
    EXPECT_NO_THROW(c.validate());
    c.score_thr = 1.5;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Match, SingleExactHit) {
    const std::vector<Instance> g{gt("g", "im", {0, 0, 10, 10})};
    const std::vector<Detection> d{det("im", {0, 0, 10, 10}, 0.9)};
    const auto m = match_detections(d, g, 0.5, 0.5);
    EXPECT_EQ(m.tp(), 1u);
    EXPECT_EQ(m.fp(), 0u);
    EXPECT_EQ(m.fn(), 0u);
}

TEST(Match, ScoreGate) {
    const std::vector<Instance> g{gt("g", "im", {0, 0, 10, 10})};
    const std::vector<Detection> d{det("im", {0, 0, 10, 10}, 0.4)};
    const auto m = match_detections(d, g, 0.5, 0.5);
    EXPECT_EQ(m.entries.size(), 0u);
    EXPECT_EQ(m.fn(), 1u);
}

TEST(Match, HigherScoreWins) {
    const std::vector<Instance> g{gt("g", "im", {0, 0, 10, 10})};
    const std::vector<Detection> d{det("im", {1, 0, 10, 10}, 0.6), det("im", {0, 1, 10, 10}, 0.8)};
    const auto m = match_detections(d, g, 0.5, 0.5);
    ASSERT_EQ(m.entries.size(), 2u);
    EXPECT_EQ(m.entries[0].detection, 1u);
    EXPECT_TRUE(m.entries[0].is_tp);
    EXPECT_FALSE(m.entries[1].is_tp);
}

TEST(Match, ImagesAreSeparate) {
    const std::vector<Instance> g{gt("g", "a", {0, 0, 10, 10})};
    const std::vector<Detection> d{det("b", {0, 0, 10, 10}, 0.9)};
    const auto m = match_detections(d, g, 0.5, 0.5);
    EXPECT_EQ(m.tp(), 0u);
    EXPECT_EQ(m.fn(), 1u);
}

TEST(Match, MixedCategoriesRejected) {
    auto g = gt("g", "im", {0, 0, 10, 10});
    g.category = "car";
    const std::vector<Instance> gs{g};
    const std::vector<Detection> d{det("im", {0, 0, 10, 10}, 0.9)};
    EXPECT_THROW(match_detections(d, gs, 0.5, 0.5), InputError);
}

// Property: agrees with the plain-array greedy matcher on random scenes.
TEST(Match, PropertyAgreesWithOracle) {
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> pos(0.0, 30.0), size(4.0, 12.0), score(0.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<Instance> gs;
        std::vector<oracle::Gt> ogs;
        std::vector<Detection> ds;
        std::vector<oracle::Det> ods;
        const int n_gt = static_cast<int>(gen() % 5), n_det = static_cast<int>(gen() % 7);
        for (int i = 0; i < n_gt; ++i) {
            const int image = static_cast<int>(gen() % 2);
            const BBox b{pos(gen), pos(gen), size(gen), size(gen)};
            gs.push_back(gt("g" + std::to_string(i), std::to_string(image), b));
            ogs.push_back({image, {b.x, b.y, b.w, b.h}});
        }
        for (int i = 0; i < n_det; ++i) {
            const int image = static_cast<int>(gen() % 2);
            const BBox b{pos(gen), pos(gen), size(gen), size(gen)};
            // Coarse scores force ties, which must resolve by input order.
            const double s = std::round(score(gen) * 4.0) / 4.0;
            ds.push_back(det(std::to_string(image), b, s));
            ods.push_back({image, {b.x, b.y, b.w, b.h}, s});
        }
        for (double thr : {0.1, 0.3, 0.5}) {
            const auto got = match_detections(ds, gs, thr, 0.5);
            const auto want = oracle::greedy_match(ods, ogs, thr, 0.5);
            ASSERT_EQ(got.entries.size(), want.size());
            for (std::size_t i = 0; i < want.size(); ++i) {
                ASSERT_EQ(static_cast<int>(got.entries[i].detection), want[i].first);
                ASSERT_EQ(got.entries[i].is_tp, want[i].second.has_value());
                if (want[i].second) {
                    ASSERT_EQ(static_cast<int>(*got.entries[i].gt), *want[i].second);
                }
            }
        }
    }
}

TEST(AveragePrecision, Examples) {
    auto ap = [](std::vector<bool> pattern, std::size_t n_gt) {
        const auto f = from_pattern(pattern, n_gt);
        return average_precision(match_detections(f.dets, f.gts, 0.5, 0.5));
    };
    EXPECT_DOUBLE_EQ(*ap({true, true, false}, 2), 1.0);
    EXPECT_DOUBLE_EQ(*ap({}, 2), 0.0);
    EXPECT_DOUBLE_EQ(*ap({true, false, true}, 2), 5.0 / 6.0);
    EXPECT_FALSE(ap({false}, 0).has_value());
}

// Every TP/FP sequence of length <= 5 against 1..3 GT, both AP variants.
TEST(AveragePrecision, ExhaustiveOracleEquality) {
    for (std::size_t n_gt = 1; n_gt <= 3; ++n_gt) {
        for (std::size_t len = 0; len <= 5; ++len) {
            for (unsigned mask = 0; mask < (1u << len); ++mask) {
                std::vector<bool> pattern;
                for (std::size_t i = 0; i < len; ++i) pattern.push_back((mask >> i) & 1u);
                if (static_cast<std::size_t>(std::count(pattern.begin(), pattern.end(), true)) >
                    n_gt) {
                    continue;
                }
                const auto f = from_pattern(pattern, n_gt);
                const auto m = match_detections(f.dets, f.gts, 0.5, 0.5);
                ASSERT_EQ(*average_precision(m, ApMode::Continuous),
                          oracle::continuous_ap(pattern, n_gt));
                ASSERT_EQ(*average_precision(m, ApMode::Point101),
                          oracle::point101_ap(pattern, n_gt));
            }
        }
    }
}

TEST(MeanAveragePrecision, PerfectAndEmpty) {
    const std::vector<Instance> g{gt("g0", "im", {0, 0, 10, 10}), gt("g1", "im", {50, 0, 10, 10})};
    const std::vector<Detection> perfect{det("im", {0, 0, 10, 10}, 0.9),
                                         det("im", {50, 0, 10, 10}, 0.8)};
    const auto r = mean_average_precision(perfect, g);
    EXPECT_EQ(*r.map, 1.0);
    for (const auto& ap : r.aps) EXPECT_EQ(*ap, 1.0);
    EXPECT_EQ(*mean_average_precision(std::vector<Detection>{}, g).map, 0.0);
    EXPECT_FALSE(mean_average_precision(perfect, std::vector<Instance>{}).map.has_value());
}

// TP, FP, then a detection at IOU exactly 0.6 over two GT.
TEST(MeanAveragePrecision, ThresholdStraddlingFixture) {
    const std::vector<Instance> g{gt("g0", "im", {0, 0, 10, 10}), gt("g1", "im", {100, 0, 10, 10})};
    const std::vector<Detection> d{det("im", {0, 0, 10, 10}, 0.9), det("im", {300, 300, 10, 10}, 0.8),
                                   det("im", {100, 0, 10, 6}, 0.7)};
    const auto r = mean_average_precision(d, g);
    const double strict = oracle::continuous_ap({true, false, true}, 2);
    const double loose = oracle::continuous_ap({true, false, false}, 2);
    for (std::size_t t = 0; t < 10; ++t) {
        EXPECT_EQ(*r.aps[t], t < 3 ? strict : loose) << "threshold " << r.iou_thresholds[t];
    }
    EXPECT_NEAR(*r.map, 0.6, 1e-12);
}

TEST(BinnedEvaluation, SingleIntervalMatchesGlobal) {
    const std::vector<Instance> g{gt("g0", "im", {0, 0, 10, 10}, 5.0),
                                  gt("g1", "im", {100, 0, 10, 10}, 50.0)};
    const std::vector<Detection> d{det("im", {0, 0, 10, 10}, 0.9), det("im", {300, 0, 10, 10}, 0.8),
                                   det("im", {100, 0, 10, 7}, 0.7)};
    const auto report =
        binned_evaluation(d, g, IntervalPartition::from_boundaries({1.0, 100.0}));
    const auto global = mean_average_precision(d, g);
    ASSERT_EQ(report.intervals.size(), 1u);
    EXPECT_EQ(report.intervals[0].aps, global.aps);
    EXPECT_EQ(report.intervals[0].map, global.map);
}

TEST(BinnedEvaluation, UpperOnlyDetections) {
    const std::vector<Instance> g{gt("lo", "im", {0, 0, 10, 10}, 2.0),
                                  gt("hi", "im", {100, 0, 10, 10}, 20.0)};
    const std::vector<Detection> d{det("im", {100, 0, 10, 10}, 0.9)};
    const auto p = IntervalPartition::from_boundaries({1.0, 10.0, 100.0});
    const auto report = binned_evaluation(d, g, p);
    EXPECT_EQ(*report.intervals[0].map, 0.0);
    EXPECT_EQ(*report.intervals[1].map, 1.0);
    EXPECT_EQ(report.intervals[1].tp50, 1u);
    EXPECT_EQ(report.intervals[0].fn50, 1u);
}

TEST(BinnedEvaluation, FalsePositivesPlacedByOwnMean) {
    const std::vector<Instance> g{gt("lo", "im", {0, 0, 10, 10}, 2.0),
                                  gt("hi", "im", {100, 0, 10, 10}, 20.0)};
    const std::vector<Detection> d{det("im", {0, 0, 10, 10}, 0.9), det("im", {100, 0, 10, 10}, 0.9),
                                   det("im", {300, 0, 10, 10}, 0.95, 500.0)};
    const auto p = IntervalPartition::from_boundaries({1.0, 10.0, 100.0});
    const auto report = binned_evaluation(d, g, p);
    EXPECT_EQ(report.intervals[0].fp50, 0u);
    EXPECT_EQ(report.intervals[1].fp50, 1u);  // clamped into the top interval
    EXPECT_EQ(*report.intervals[0].map, 1.0);
    EXPECT_DOUBLE_EQ(*report.intervals[1].map, 0.5);

    const std::vector<Detection> no_mean{det("im", {300, 0, 10, 10}, 0.95)};
    EXPECT_THROW(binned_evaluation(no_mean, g, p), InputError);
}

TEST(BinnedEvaluation, OutsideGtExcluded) {
    const std::vector<Instance> g{gt("in", "im", {0, 0, 10, 10}, 2.0),
                                  gt("out", "im", {100, 0, 10, 10}, 2000.0)};
    const auto report = binned_evaluation(std::vector<Detection>{}, g,
                                          IntervalPartition::from_boundaries({1.0, 10.0}));
    EXPECT_EQ(report.excluded_gt, 1u);
    EXPECT_EQ(report.intervals[0].gt_count, 1u);
    const std::vector<Instance> missing{gt("m", "im", {0, 0, 10, 10})};
    EXPECT_THROW(binned_evaluation(std::vector<Detection>{}, missing,
                                   IntervalPartition::from_boundaries({1.0, 10.0})),
                 InputError);
}

#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "rawnight/eval.hpp"
#include "rawnight/geometry.hpp"
#include "rawnight/raw_core.hpp"

namespace rawnight {

struct DetectorInput {
    std::string image_id;
    const ElectronMap& electrons;
    std::span<const BBox> candidates;  ///< regions the detector is asked about
};

// Stand-in for an external detector. Only the toy implementations look at pixels.
class Detector {
public:
    virtual ~Detector() = default;
    virtual std::string name() const = 0;
    virtual std::vector<Detection> detect(const DetectorInput& input) const = 0;
};

// Fires on a candidate iff its mean electron count reaches min_mean.
class ThresholdDetector final : public Detector {
public:
    explicit ThresholdDetector(double min_mean = 3.5, double score = 0.9)
        : min_mean_(min_mean), score_(score) {}

    std::string name() const override { return "toy-threshold"; }
    std::vector<Detection> detect(const DetectorInput& input) const override;

private:
    double min_mean_;
    double score_;
};

// Fires iff the candidate's electron variance/mean ratio reaches min_fano,
// i.e. it looks for shot-noise-like texture. Flat regions thinned without
// noise adjustment have a ratio near k and are missed.
class VarianceDetector final : public Detector {
public:
    explicit VarianceDetector(double min_fano = 0.5, double score = 0.9)
        : min_fano_(min_fano), score_(score) {}

    std::string name() const override { return "toy-variance"; }
    std::vector<Detection> detect(const DetectorInput& input) const override;

private:
    double min_fano_;
    double score_;
};

// Replays detections produced elsewhere, keyed by image id.
class RecordedDetections final : public Detector {
public:
    explicit RecordedDetections(std::span<const Detection> detections);

    std::string name() const override { return "recorded"; }
    std::vector<Detection> detect(const DetectorInput& input) const override;

private:
    std::map<std::string, std::vector<Detection>> by_image_;
};

}  // namespace rawnight

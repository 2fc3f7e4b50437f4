#include "rawnight/detectors.hpp"

#include "rawnight/kernels.hpp"

namespace rawnight {

std::vector<Detection> ThresholdDetector::detect(const DetectorInput& input) const {
    std::vector<Detection> out;
    for (const auto& box : input.candidates) {
        const auto rect = pixel_rect(box, input.electrons.width(), input.electrons.height());
        const double mean = kernels::omp::box_sum(input.electrons.data(),
                                                  input.electrons.width(), rect) /
                            static_cast<double>(rect.count());
        if (mean >= min_mean_) {
            out.push_back({input.image_id, "person", box, score_, mean});
        }
    }
    return out;
}

std::vector<Detection> VarianceDetector::detect(const DetectorInput& input) const {
    std::vector<Detection> out;
    for (const auto& box : input.candidates) {
        const auto rect = pixel_rect(box, input.electrons.width(), input.electrons.height());
        const auto m = kernels::omp::box_moments(input.electrons.data(),
                                                 input.electrons.width(), rect);
        if (m.mean > 0.0 && m.variance / m.mean >= min_fano_) {
            out.push_back({input.image_id, "person", box, score_, m.mean});
        }
    }
    return out;
}

RecordedDetections::RecordedDetections(std::span<const Detection> detections) {
    for (const auto& d : detections) {
        by_image_[d.image_id].push_back(d);
    }
}

std::vector<Detection> RecordedDetections::detect(const DetectorInput& input) const {
    const auto it = by_image_.find(input.image_id);
    return it == by_image_.end() ? std::vector<Detection>{} : it->second;
}

}  // namespace rawnight

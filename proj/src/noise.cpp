#include "rawnight/noise.hpp"

#include <cmath>

#include "rawnight/errors.hpp"
#include "rawnight/kernels.hpp"

namespace rawnight {

namespace {

// Relative slack on the read-noise compensation check; g/k round-off can push
// an exactly balanced pair a few ulps negative.
constexpr double kCompensationSlack = 1e-12;

void check_k(double k) {
    if (!(k > 0.0) || !(k <= 1.0)) {
        throw SpecError("survival probability k must lie in (0, 1], got " + std::to_string(k));
    }
}

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string_view to_string(ThinMode mode) {
    switch (mode) {
        case ThinMode::NoiseAwareGaussian: return "noise_aware_gaussian";
        case ThinMode::NoiseAwareBinomial: return "noise_aware_binomial";
        case ThinMode::Naive: return "naive";
    }
    return "naive";
}

ThinMode parse_thin_mode(std::string_view text) {
    for (auto mode : {ThinMode::NoiseAwareGaussian, ThinMode::NoiseAwareBinomial,
                      ThinMode::Naive}) {
        if (text == to_string(mode)) {
            return mode;
        }
    }
    throw SpecError("unknown thinning mode '" + std::string(text) + "'");
}

double ThinningSpec::read_noise_compensation() const {
    const double src = src_calib.read_noise_electrons();
    const double dst = dst_calib.read_noise_electrons();
    return dst * dst - k * k * src * src;
}

void ThinningSpec::validate() const {
    check_k(k);
    try {
        src_calib.validate();
        dst_calib.validate();
    } catch (const CalibrationError& e) {
        throw SpecError(std::string("invalid calibration in thinning spec: ") + e.what());
    }
    if (mode == ThinMode::Naive) {
        return;
    }
    const double src = src_calib.read_noise_electrons();
    const double floor = k * k * src * src;
    if (read_noise_compensation() < -kCompensationSlack * floor) {
        throw SpecError("destination read noise " +
                        std::to_string(dst_calib.read_noise_electrons()) +
                        " e is below k * source read noise " + std::to_string(k * src) +
                        " e; compensation variance would be negative");
    }
}

ElectronMap thin_noise_aware(const ElectronMap& map, const ThinningSpec& spec) {
    if (spec.mode == ThinMode::Naive) {
        throw SpecError("thin_noise_aware called with naive mode");
    }
    spec.validate();
    const double read_var = std::max(0.0, spec.read_noise_compensation());
    ElectronMap out(map.width(), map.height());
    if (spec.mode == ThinMode::NoiseAwareGaussian) {
        kernels::omp::thin_gaussian(map.data(), spec.k, read_var, spec.seed,
                                    out.mutable_data());
    } else {
        kernels::omp::thin_binomial(map.data(), spec.k, read_var, spec.seed,
                                    out.mutable_data());
    }
    return out;
}

ElectronMap thin_naive(const ElectronMap& map, double k) {
    check_k(k);
    ElectronMap out(map.width(), map.height());
    kernels::omp::scale(map.data(), k, out.mutable_data());
    return out;
}

ElectronMap thin(const ElectronMap& map, const ThinningSpec& spec) {
    if (spec.mode == ThinMode::Naive) {
        return thin_naive(map, spec.k);
    }
    return thin_noise_aware(map, spec);
}

std::string describe(const GainPolicy& policy) {
    return std::visit(Overloaded{
                          [](const KeepCalibration&) { return std::string("keep"); },
                          [](const PreserveDnMagnitude&) {
                              return std::string("preserve_dn_magnitude");
                          },
                          [](const MatchIso& m) {
                              return "match_iso(" + std::to_string(m.target_iso) + ")";
                          },
                      },
                      policy);
}

SensorCalibration adjust_gain_for_target(const SensorCalibration& src, double k,
                                         const GainPolicy& policy, const IsoLadder& ladder) {
    check_k(k);
    return std::visit(Overloaded{
                          [&](const KeepCalibration&) { return src; },
                          [&](const PreserveDnMagnitude&) {
                              SensorCalibration out = src;
                              out.gain = src.gain / k;
                              return out;
                          },
                          [&](const MatchIso& m) {
                              const auto it = ladder.find(m.target_iso);
                              if (it == ladder.end()) {
                                  throw ConfigError("ISO " + std::to_string(m.target_iso) +
                                                    " is not in the ISO ladder");
                              }
                              return it->second;
                          },
                      },
                      policy);
}

}  // namespace rawnight

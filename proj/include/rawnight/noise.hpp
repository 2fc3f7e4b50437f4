#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rawnight/raw_core.hpp"

namespace rawnight {

enum class ThinMode { NoiseAwareGaussian, NoiseAwareBinomial, Naive };

std::string_view to_string(ThinMode mode);
ThinMode parse_thin_mode(std::string_view text);

/**
 * Parameters of one light-level reduction.
 *
 * k is the survival probability of each photo-electron. In the noise-aware
 * modes the destination read noise (in electrons) must be at least k times the
 * source read noise, otherwise the compensating Gaussian would need negative
 * variance.
 */
struct ThinningSpec {
    double k = 1.0;
    ThinMode mode = ThinMode::NoiseAwareGaussian;
    SensorCalibration src_calib;
    SensorCalibration dst_calib;
    std::uint64_t seed = 0;

    // sigma_dst^2 - k^2 sigma_src^2, in electrons^2.
    double read_noise_compensation() const;

    // Throws SpecError on any violated invariant.
    void validate() const;

    friend bool operator==(const ThinningSpec&, const ThinningSpec&) = default;
};

/// Thins the photon flux of an electron map and re-noises it for the destination sensor.
///
/// Gaussian mode: x' = k x + N(0, k(1-k) max(x,0) + dsigma^2).
/// Binomial mode: x' = Binomial(round(max(x,0)), k) + N(0, dsigma^2).
/// Each pixel draws from its own (seed, index) stream.
ElectronMap thin_noise_aware(const ElectronMap& map, const ThinningSpec& spec);

/// Pure intensity scaling x' = k x, with no noise adjustment.
ElectronMap thin_naive(const ElectronMap& map, double k);

// Dispatches on spec.mode.
ElectronMap thin(const ElectronMap& map, const ThinningSpec& spec);

// ISO -> calibration table, supplied by configuration.
using IsoLadder = std::map<int, SensorCalibration>;

struct KeepCalibration {};
struct PreserveDnMagnitude {};
struct MatchIso {
    int target_iso = 0;
};
using GainPolicy = std::variant<KeepCalibration, PreserveDnMagnitude, MatchIso>;

std::string describe(const GainPolicy& policy);

// Destination calibration for a thinned frame. Throws ConfigError for an ISO
// missing from the ladder and SpecError for k outside (0, 1].
SensorCalibration adjust_gain_for_target(const SensorCalibration& src, double k,
                                         const GainPolicy& policy,
                                         const IsoLadder& ladder = {});

// Result of a photon-transfer (variance vs mean) fit.
struct NoiseFit {
    double gain_est = 0.0;        ///< DN per electron, clamped at 0
    double read_noise_est = 0.0;  ///< DN, sqrt of the clamped intercept
    double residual = 0.0;        ///< RMS of fit residuals over mean frame variance
    double slope = 0.0;           ///< unclamped slope
    double intercept = 0.0;       ///< unclamped intercept, DN^2
    bool intercept_clamped = false;
    bool signal_independent = false;  ///< slope not significantly above zero
};

struct FlatFrameStats {
    double mean_above_black = 0.0;  ///< DN
    double variance = 0.0;          ///< DN^2, unbiased
    std::size_t count = 0;
};

FlatFrameStats flat_frame_stats(const RawImage& frame, double black_level);

/// Fits Var(y) = g (mean(y) - b) + eps^2 over flat frames at distinct illumination.
///
/// The line is fitted by iteratively reweighted least squares: each frame's
/// sample variance has standard error ~ Var sqrt(2/(n-1)), so points are
/// weighted by the inverse of that using the current fitted variance.
/// Throws FitError with fewer than 3 frames, frames under 10^4 pixels, or a
/// degenerate set (all means equal, or no variance anywhere).
NoiseFit fit_poisson_gaussian(std::span<const RawImage> frames, double black_level);

}  // namespace rawnight

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rawnight {

inline constexpr int kDefaultBitDepth = 14;

enum class CfaPattern { RGGB, BGGR, GRBG, GBRG, NONE };

std::string_view to_string(CfaPattern cfa);
CfaPattern parse_cfa_pattern(std::string_view text);

// Largest representable DN for a given bit depth: 2^d - 1.
std::uint32_t white_level_for(int bit_depth);

/**
 * Quantized sensor frame in digital numbers.
 *
 * Samples are row-major, one per photosite. The CFA pattern is metadata only;
 * nothing in this library demosaics.
 */
class RawImage {
public:
    RawImage() = default;
    RawImage(std::size_t width, std::size_t height, int bit_depth = kDefaultBitDepth,
             CfaPattern cfa = CfaPattern::RGGB);
    // Throws ImageError if the payload violates the size or white-level invariants.
    RawImage(std::size_t width, std::size_t height, std::vector<std::uint16_t> data,
             int bit_depth = kDefaultBitDepth, CfaPattern cfa = CfaPattern::RGGB);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    int bit_depth() const noexcept { return bit_depth_; }
    CfaPattern cfa() const noexcept { return cfa_; }
    std::uint32_t white_level() const noexcept { return white_level_for(bit_depth_); }

    std::span<const std::uint16_t> data() const noexcept { return data_; }

    std::uint16_t at(std::size_t x, std::size_t y) const { return data_[y * width_ + x]; }
    // Throws ImageError when value exceeds the white level.
    void set(std::size_t x, std::size_t y, std::uint16_t value);

    // Raw access for kernels that have already validated their output range.
    std::span<std::uint16_t> mutable_data() noexcept { return data_; }

    friend bool operator==(const RawImage&, const RawImage&) = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    int bit_depth_ = kDefaultBitDepth;
    CfaPattern cfa_ = CfaPattern::RGGB;
    std::vector<std::uint16_t> data_;
};

// Parameters of the measurement model y = g*x + b + eps.
struct SensorCalibration {
    double gain = 1.0;           ///< g, DN per electron
    double black_level = 0.0;    ///< b, DN
    double read_noise_dn = 0.0;  ///< eps, std-dev of readout noise in DN
    int iso = 100;

    double read_noise_electrons() const { return read_noise_dn / gain; }

    // Throws CalibrationError unless g > 0, eps >= 0, 0 <= b < 2^d - 1 and iso > 0.
    void validate(int bit_depth = kDefaultBitDepth) const;

    friend bool operator==(const SensorCalibration&, const SensorCalibration&) = default;
};

// Real-valued per-pixel electron estimates. Values may be slightly negative.
class ElectronMap {
public:
    ElectronMap() = default;
    ElectronMap(std::size_t width, std::size_t height, double fill = 0.0);
    // Throws ImageError on size mismatch or non-finite values.
    ElectronMap(std::size_t width, std::size_t height, std::vector<double> data);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> mutable_data() noexcept { return data_; }

    double at(std::size_t x, std::size_t y) const { return data_[y * width_ + x]; }
    double& at(std::size_t x, std::size_t y) { return data_[y * width_ + x]; }

    friend bool operator==(const ElectronMap&, const ElectronMap&) = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<double> data_;
};

// x = (y - b) / g. Negative estimates are kept as-is.
ElectronMap dn_to_electrons(const RawImage& raw, const SensorCalibration& calib);

// y = clamp(round(g*x + b), 0, 2^d - 1), rounding half away from zero.
RawImage electrons_to_dn(const ElectronMap& map, const SensorCalibration& calib,
                         int bit_depth = kDefaultBitDepth, CfaPattern cfa = CfaPattern::RGGB);

// Worst-case electron error of a DN round trip for unclipped pixels: 0.5 / g.
double roundtrip_error_bound(const SensorCalibration& calib);

}  // namespace rawnight

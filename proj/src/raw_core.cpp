#include "rawnight/raw_core.hpp"

#include <cmath>

#include "rawnight/errors.hpp"
#include "rawnight/geometry.hpp"
#include "rawnight/kernels.hpp"

namespace rawnight {

namespace {

void check_bit_depth(int bit_depth) {
    if (bit_depth < 1 || bit_depth > 16) {
        throw ImageError("bit depth must be in [1, 16], got " + std::to_string(bit_depth));
    }
}

}  // namespace

std::string_view to_string(CfaPattern cfa) {
    switch (cfa) {
        case CfaPattern::RGGB: return "RGGB";
        case CfaPattern::BGGR: return "BGGR";
        case CfaPattern::GRBG: return "GRBG";
        case CfaPattern::GBRG: return "GBRG";
        case CfaPattern::NONE: return "NONE";
    }
    return "NONE";
}

CfaPattern parse_cfa_pattern(std::string_view text) {
    for (auto cfa : {CfaPattern::RGGB, CfaPattern::BGGR, CfaPattern::GRBG,
                     CfaPattern::GBRG, CfaPattern::NONE}) {
        if (text == to_string(cfa)) {
            return cfa;
        }
    }
    throw ImageError("unknown CFA pattern '" + std::string(text) + "'");
}

std::uint32_t white_level_for(int bit_depth) {
    check_bit_depth(bit_depth);
    return (std::uint32_t{1} << bit_depth) - 1;
}

RawImage::RawImage(std::size_t width, std::size_t height, int bit_depth, CfaPattern cfa)
    : width_(width), height_(height), bit_depth_(bit_depth), cfa_(cfa),
      data_(width * height, 0) {
    check_bit_depth(bit_depth);
}

RawImage::RawImage(std::size_t width, std::size_t height, std::vector<std::uint16_t> data,
                   int bit_depth, CfaPattern cfa)
    : width_(width), height_(height), bit_depth_(bit_depth), cfa_(cfa),
      data_(std::move(data)) {
    check_bit_depth(bit_depth);
    if (data_.size() != width_ * height_) {
        throw ImageError("raw payload has " + std::to_string(data_.size()) +
                         " samples, expected " + std::to_string(width_ * height_));
    }
    const auto white = white_level();
    for (std::size_t i = 0; i < data_.size(); ++i) {
        if (data_[i] > white) {
            throw ImageError("sample " + std::to_string(i) + " = " +
                             std::to_string(data_[i]) + " exceeds white level " +
                             std::to_string(white));
        }
    }
}

void RawImage::set(std::size_t x, std::size_t y, std::uint16_t value) {
    if (value > white_level()) {
        throw ImageError("value " + std::to_string(value) + " exceeds white level");
    }
    data_[y * width_ + x] = value;
}

void SensorCalibration::validate(int bit_depth) const {
    if (!(gain > 0.0) || !std::isfinite(gain)) {
        throw CalibrationError("gain must be positive and finite, got " + std::to_string(gain));
    }
    if (!(read_noise_dn >= 0.0) || !std::isfinite(read_noise_dn)) {
        throw CalibrationError("read noise must be non-negative, got " +
                               std::to_string(read_noise_dn));
    }
    const double white = static_cast<double>(white_level_for(bit_depth));
    if (!(black_level >= 0.0) || !(black_level < white)) {
        throw CalibrationError("black level must lie in [0, white level), got " +
                               std::to_string(black_level));
    }
    if (iso <= 0) {
        throw CalibrationError("iso must be positive, got " + std::to_string(iso));
    }
}

ElectronMap::ElectronMap(std::size_t width, std::size_t height, double fill)
    : width_(width), height_(height), data_(width * height, fill) {
    if (!std::isfinite(fill)) {
        throw ImageError("electron map fill value must be finite");
    }
}

ElectronMap::ElectronMap(std::size_t width, std::size_t height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
    if (data_.size() != width_ * height_) {
        throw ImageError("electron map has " + std::to_string(data_.size()) +
                         " values, expected " + std::to_string(width_ * height_));
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
        if (!std::isfinite(data_[i])) {
            throw ImageError("electron map value " + std::to_string(i) + " is not finite");
        }
    }
}

ElectronMap dn_to_electrons(const RawImage& raw, const SensorCalibration& calib) {
    if (!(calib.gain > 0.0)) {
        throw CalibrationError("gain must be positive, got " + std::to_string(calib.gain));
    }
    ElectronMap out(raw.width(), raw.height());
    kernels::omp::dn_to_electrons(raw.data(), calib.gain, calib.black_level,
                                  out.mutable_data());
    return out;
}

RawImage electrons_to_dn(const ElectronMap& map, const SensorCalibration& calib,
                         int bit_depth, CfaPattern cfa) {
    calib.validate(bit_depth);
    RawImage out(map.width(), map.height(), bit_depth, cfa);
    kernels::omp::electrons_to_dn(map.data(), calib.gain, calib.black_level,
                                  out.white_level(), out.mutable_data());
    return out;
}

double roundtrip_error_bound(const SensorCalibration& calib) {
    if (!(calib.gain > 0.0)) {
        throw CalibrationError("gain must be positive, got " + std::to_string(calib.gain));
    }
    return 0.5 / calib.gain;
}

PixelRect pixel_rect(const BBox& box, std::size_t width, std::size_t height) {
    if (!(box.w > 0.0) || !(box.h > 0.0)) {
        throw GeometryError("box must have positive extent");
    }
    const double x0 = std::floor(box.x);
    const double y0 = std::floor(box.y);
    const double x1 = std::ceil(box.x + box.w);
    const double y1 = std::ceil(box.y + box.h);
    if (x0 < 0.0 || y0 < 0.0 || x1 > static_cast<double>(width) ||
        y1 > static_cast<double>(height)) {
        throw GeometryError("box (" + std::to_string(box.x) + ", " + std::to_string(box.y) +
                            ", " + std::to_string(box.w) + ", " + std::to_string(box.h) +
                            ") leaves the " + std::to_string(width) + "x" +
                            std::to_string(height) + " frame");
    }
    return {static_cast<std::size_t>(x0), static_cast<std::size_t>(y0),
            static_cast<std::size_t>(x1), static_cast<std::size_t>(y1)};
}

PixelRect clipped_pixel_rect(const BBox& box, std::size_t width, std::size_t height) {
    const double x0 = std::max(0.0, std::floor(box.x));
    const double y0 = std::max(0.0, std::floor(box.y));
    const double x1 = std::min(static_cast<double>(width), std::ceil(box.x + box.w));
    const double y1 = std::min(static_cast<double>(height), std::ceil(box.y + box.h));
    if (!(x1 > x0) || !(y1 > y0)) {
        throw GeometryError("box does not overlap the frame");
    }
    return {static_cast<std::size_t>(x0), static_cast<std::size_t>(y0),
            static_cast<std::size_t>(x1), static_cast<std::size_t>(y1)};
}

}  // namespace rawnight

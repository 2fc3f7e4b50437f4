#pragma once

// RNC1 raster container.
//
//   offset 0   "RNC1"
//   offset 4   uint32 LE  header length L
//   offset 8   L bytes    UTF-8 JSON header
//   offset 8+L payload    width*height samples, row-major, little-endian
//
// The header carries width, height, bit_depth, cfa_pattern, payload kind,
// calibration and free-form provenance. DN frames store uint16 samples;
// electron maps (written by `convert`) store float64 samples.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rawnight/raw_core.hpp"

namespace rawnight {

inline constexpr std::string_view kContainerMagic = "RNC1";
inline constexpr int kContainerSchemaVersion = 1;

enum class PayloadKind { DnU16, ElectronsF64 };

std::string_view to_string(PayloadKind kind);

struct RasterFile {
    SensorCalibration calib;
    int bit_depth = kDefaultBitDepth;
    CfaPattern cfa = CfaPattern::RGGB;
    nlohmann::json provenance = nlohmann::json::object();
    std::variant<RawImage, ElectronMap> raster;

    PayloadKind payload() const;
    std::size_t width() const;
    std::size_t height() const;

    // Throw InputError when the payload is of the other kind.
    const RawImage& dn() const;
    const ElectronMap& electrons() const;

    // Electron map of the payload, converting DN frames through calib.
    ElectronMap to_electrons() const;
};

std::vector<std::uint8_t> encode_container(const RasterFile& file);

// Throws IoError with the byte offset of the first inconsistency.
RasterFile decode_container(std::span<const std::uint8_t> bytes);

void write_container(const std::filesystem::path& path, const RasterFile& file);
RasterFile read_container(const std::filesystem::path& path);

// Wraps a DN frame with its calibration into a RasterFile.
RasterFile make_dn_file(RawImage image, const SensorCalibration& calib,
                        nlohmann::json provenance = nlohmann::json::object());

/// Adapter for externally extracted planes: a bare uint16 LE row-major plane
/// plus a JSON sidecar with width, height, bit_depth, cfa_pattern, calibration.
/// Throws IoError when the sidecar is missing or the plane has the wrong size.
RasterFile import_plane(const std::filesystem::path& plane,
                        const std::filesystem::path& sidecar);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace rawnight

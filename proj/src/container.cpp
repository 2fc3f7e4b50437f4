#include "rawnight/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "rawnight/errors.hpp"
#include "rawnight/json_io.hpp"

namespace rawnight {

namespace {

using nlohmann::json;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[at + i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::span<const std::uint8_t> b, std::size_t at) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[at + i]) << (8 * i);
    return v;
}

PayloadKind parse_payload(const std::string& text) {
    if (text == "dn_u16le") return PayloadKind::DnU16;
    if (text == "electrons_f64le") return PayloadKind::ElectronsF64;
    throw InputError("unknown payload kind '" + text + "'");
}

struct Header {
    std::size_t width = 0;
    std::size_t height = 0;
    int bit_depth = kDefaultBitDepth;
    CfaPattern cfa = CfaPattern::RGGB;
    PayloadKind payload = PayloadKind::DnU16;
    SensorCalibration calib;
    json provenance = json::object();
};

Header parse_header(const json& j) {
    Header h;
    if (j.contains("schema_version") && j.at("schema_version").get<int>() != kContainerSchemaVersion) {
        throw InputError("unsupported container schema_version " + j.at("schema_version").dump());
    }
    h.width = j.at("width").get<std::size_t>();
    h.height = j.at("height").get<std::size_t>();
    h.bit_depth = j.value("bit_depth", kDefaultBitDepth);
    h.cfa = parse_cfa_pattern(j.value("cfa_pattern", std::string("RGGB")));
    h.payload = parse_payload(j.value("payload", std::string("dn_u16le")));
    h.calib = j.at("calibration").get<SensorCalibration>();
    h.calib.validate(h.bit_depth);
    if (j.contains("provenance")) h.provenance = j.at("provenance");
    return h;
}

}  // namespace

std::string_view to_string(PayloadKind kind) {
    return kind == PayloadKind::DnU16 ? "dn_u16le" : "electrons_f64le";
}

PayloadKind RasterFile::payload() const {
    return std::holds_alternative<RawImage>(raster) ? PayloadKind::DnU16
                                                    : PayloadKind::ElectronsF64;
}

std::size_t RasterFile::width() const {
    return std::visit([](const auto& r) { return r.width(); }, raster);
}

std::size_t RasterFile::height() const {
    return std::visit([](const auto& r) { return r.height(); }, raster);
}

const RawImage& RasterFile::dn() const {
    if (const auto* img = std::get_if<RawImage>(&raster)) return *img;
    throw InputError("container holds electrons, expected DN samples");
}

const ElectronMap& RasterFile::electrons() const {
    if (const auto* map = std::get_if<ElectronMap>(&raster)) return *map;
    throw InputError("container holds DN samples, expected electrons");
}

ElectronMap RasterFile::to_electrons() const {
    if (const auto* map = std::get_if<ElectronMap>(&raster)) return *map;
    return dn_to_electrons(std::get<RawImage>(raster), calib);
}

std::vector<std::uint8_t> encode_container(const RasterFile& file) {
    json header = {
        {"schema_version", kContainerSchemaVersion},
        {"width", file.width()},
        {"height", file.height()},
        {"bit_depth", file.bit_depth},
        {"cfa_pattern", std::string(to_string(file.cfa))},
        {"payload", std::string(to_string(file.payload()))},
        {"calibration", file.calib},
        {"provenance", file.provenance},
    };
    const std::string text = header.dump();

    std::vector<std::uint8_t> out;
    const std::size_t samples = file.width() * file.height();
    out.reserve(8 + text.size() + samples * 8);
    out.insert(out.end(), kContainerMagic.begin(), kContainerMagic.end());
    put_u32(out, static_cast<std::uint32_t>(text.size()));
    out.insert(out.end(), text.begin(), text.end());
    if (const auto* img = std::get_if<RawImage>(&file.raster)) {
        for (auto v : img->data()) {
            out.push_back(static_cast<std::uint8_t>(v & 0xff));
            out.push_back(static_cast<std::uint8_t>(v >> 8));
        }
    } else {
        for (double v : std::get<ElectronMap>(file.raster).data()) {
            const auto bits = std::bit_cast<std::uint64_t>(v);
            for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
        }
    }
    return out;
}

RasterFile decode_container(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 ||
        std::memcmp(bytes.data(), kContainerMagic.data(), kContainerMagic.size()) != 0) {
        throw IoError("not an RNC1 container: bad magic", 0);
    }
    if (bytes.size() < 8) {
        throw IoError("truncated container: missing header length", 4);
    }
    const std::uint32_t header_len = get_u32(bytes, 4);
    if (header_len == 0) {
        throw IoError("container has no JSON sidecar header", 4);
    }
    if (bytes.size() - 8 < header_len) {
        throw IoError("header length " + std::to_string(header_len) + " runs past end of file (" +
                          std::to_string(bytes.size()) + " bytes)",
                      4);
    }

    Header h;
    try {
        const auto text = std::string_view(reinterpret_cast<const char*>(bytes.data() + 8), header_len);
        h = parse_header(json::parse(text));
    } catch (const json::parse_error& e) {
        throw IoError(std::string("malformed JSON header: ") + e.what(),
                      8 + (e.byte > 0 ? e.byte - 1 : 0));
    } catch (const json::exception& e) {
        throw IoError(std::string("invalid JSON header: ") + e.what(), 8);
    } catch (const Error& e) {
        throw IoError(std::string("invalid JSON header: ") + e.what(), 8);
    }

    const std::size_t payload_at = 8 + static_cast<std::size_t>(header_len);
    const std::size_t samples = h.width * h.height;
    const std::size_t sample_bytes = h.payload == PayloadKind::DnU16 ? 2 : 8;
    const std::size_t have = bytes.size() - payload_at;
    if (have != samples * sample_bytes) {
        throw IoError("payload holds " + std::to_string(have) + " bytes, expected " +
                          std::to_string(samples * sample_bytes) + " for " +
                          std::to_string(h.width) + "x" + std::to_string(h.height),
                      payload_at + std::min(have, samples * sample_bytes));
    }

    RasterFile file;
    file.calib = h.calib;
    file.bit_depth = h.bit_depth;
    file.cfa = h.cfa;
    file.provenance = h.provenance;
    if (h.payload == PayloadKind::DnU16) {
        const std::uint32_t white = white_level_for(h.bit_depth);
        std::vector<std::uint16_t> data(samples);
        for (std::size_t i = 0; i < samples; ++i) {
            const std::size_t at = payload_at + 2 * i;
            data[i] = static_cast<std::uint16_t>(bytes[at] | (bytes[at + 1] << 8));
            if (data[i] > white) {
                throw IoError("sample " + std::to_string(i) + " = " + std::to_string(data[i]) +
                                  " exceeds white level " + std::to_string(white),
                              at);
            }
        }
        file.raster = RawImage(h.width, h.height, std::move(data), h.bit_depth, h.cfa);
    } else {
        std::vector<double> data(samples);
        for (std::size_t i = 0; i < samples; ++i) {
            const std::size_t at = payload_at + 8 * i;
            data[i] = std::bit_cast<double>(get_u64(bytes, at));
            if (!std::isfinite(data[i])) {
                throw IoError("electron sample " + std::to_string(i) + " is not finite", at);
            }
        }
        file.raster = ElectronMap(h.width, h.height, std::move(data));
    }
    return file;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "' for reading");
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("short write to '" + path.string() + "'");
    }
}

void write_container(const std::filesystem::path& path, const RasterFile& file) {
    write_bytes(path, encode_container(file));
}

RasterFile read_container(const std::filesystem::path& path) {
    const auto bytes = read_bytes(path);
    try {
        return decode_container(bytes);
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

RasterFile make_dn_file(RawImage image, const SensorCalibration& calib, nlohmann::json provenance) {
    calib.validate(image.bit_depth());
    RasterFile file;
    file.calib = calib;
    file.bit_depth = image.bit_depth();
    file.cfa = image.cfa();
    file.provenance = std::move(provenance);
    file.raster = std::move(image);
    return file;
}

RasterFile import_plane(const std::filesystem::path& plane,
                        const std::filesystem::path& sidecar) {
    if (!std::filesystem::exists(sidecar)) {
        throw IoError("missing sidecar '" + sidecar.string() + "' for plane '" +
                      plane.string() + "'");
    }
    Header h;
    try {
        h = parse_header(json::parse(std::ifstream(sidecar)));
    } catch (const json::parse_error& e) {
        throw IoError("malformed sidecar '" + sidecar.string() + "': " + e.what(),
                      e.byte > 0 ? e.byte - 1 : 0);
    } catch (const json::exception& e) {
        throw IoError("invalid sidecar '" + sidecar.string() + "': " + e.what());
    }
    if (h.payload != PayloadKind::DnU16) {
        throw IoError("only DN planes can be imported");
    }
    const auto bytes = read_bytes(plane);
    const std::size_t samples = h.width * h.height;
    if (bytes.size() != samples * 2) {
        throw IoError("plane '" + plane.string() + "' holds " + std::to_string(bytes.size()) +
                          " bytes, expected " + std::to_string(samples * 2),
                      std::min(bytes.size(), samples * 2));
    }
    const std::uint32_t white = white_level_for(h.bit_depth);
    std::vector<std::uint16_t> data(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        data[i] = static_cast<std::uint16_t>(bytes[2 * i] | (bytes[2 * i + 1] << 8));
        if (data[i] > white) {
            throw IoError("plane sample " + std::to_string(i) + " exceeds white level", 2 * i);
        }
    }
    return make_dn_file(RawImage(h.width, h.height, std::move(data), h.bit_depth, h.cfa),
                        h.calib, h.provenance);
}

}  // namespace rawnight

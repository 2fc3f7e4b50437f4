#include <gtest/gtest.h>

#include <cstring>

#include "fixtures.hpp"
#include "rawnight/container.hpp"
#include "rawnight/errors.hpp"

using namespace rawnight;

namespace {

RasterFile sample_dn() {
    std::vector<std::uint16_t> data(12);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<std::uint16_t>(500 + 37 * i);
    return make_dn_file(RawImage(4, 3, data, 12, CfaPattern::GRBG), {2.0, 64.0, 3.0, 400},
                        {{"source", "unit"}});
}

std::optional<std::uint64_t> offset_of(std::span<const std::uint8_t> bytes) {
    try {
        decode_container(bytes);
    } catch (const IoError& e) {
        return e.offset();
    }
    return std::nullopt;
}

}  // namespace

TEST(Container, LayoutIsLittleEndianWithJsonHeader) {
    const auto bytes = encode_container(sample_dn());
    ASSERT_GE(bytes.size(), 8u);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "RNC1");
    const std::uint32_t len = bytes[4] | (bytes[5] << 8) | (bytes[6] << 16) | (bytes[7] << 24);
    const auto header = nlohmann::json::parse(bytes.begin() + 8, bytes.begin() + 8 + len);
    EXPECT_EQ(header["width"], 4);
    EXPECT_EQ(header["height"], 3);
    EXPECT_EQ(header["bit_depth"], 12);
    EXPECT_EQ(header["cfa_pattern"], "GRBG");
    EXPECT_EQ(header["schema_version"], 1);
    EXPECT_EQ(header["calibration"]["gain"], 2.0);
    EXPECT_EQ(bytes.size(), 8 + len + 24);
    // First sample 500 = 0x01F4.
    EXPECT_EQ(bytes[8 + len], 0xF4);
    EXPECT_EQ(bytes[8 + len + 1], 0x01);
}

TEST(Container, RoundTripDn) {
    const auto file = sample_dn();
    const auto back = decode_container(encode_container(file));
    EXPECT_EQ(back.dn(), file.dn());
    EXPECT_EQ(back.calib, file.calib);
    EXPECT_EQ(back.bit_depth, 12);
    EXPECT_EQ(back.cfa, CfaPattern::GRBG);
    EXPECT_EQ(back.provenance, file.provenance);
    EXPECT_EQ(encode_container(back), encode_container(file));
}

TEST(Container, RoundTripElectrons) {
    RasterFile file;
    file.calib = {2.0, 512.0, 4.0, 100};
    file.raster = ElectronMap(3, 2, std::vector<double>{-1.25, 0.0, 1e-300, 50.0, 3.14159, 1e6});
    const auto back = decode_container(encode_container(file));
    EXPECT_EQ(back.payload(), PayloadKind::ElectronsF64);
    EXPECT_EQ(back.electrons(), file.electrons());
    EXPECT_THROW(back.dn(), InputError);
}

TEST(Container, ToElectronsConvertsDn) {
    const auto file = make_dn_file(RawImage(2, 1, std::vector<std::uint16_t>{612, 612}),
                                   {2.0, 512.0, 0.0, 100});
    const auto e = file.to_electrons();
    EXPECT_DOUBLE_EQ(e.at(0, 0), 50.0);
    EXPECT_DOUBLE_EQ(e.at(1, 0), 50.0);
}

TEST(Container, ErrorsCarryByteOffsets) {
    const auto good = encode_container(sample_dn());
    const std::uint32_t len = good[4] | (good[5] << 8) | (good[6] << 16) | (good[7] << 24);

    auto bad_magic = good;
    bad_magic[0] = 'X';
    EXPECT_EQ(offset_of(bad_magic), 0u);

    const std::vector<std::uint8_t> short_header(good.begin(), good.begin() + 6);
    EXPECT_EQ(offset_of(short_header), 4u);

    auto long_len = good;
    long_len[7] = 0x7f;
    EXPECT_EQ(offset_of(long_len), 4u);

    auto truncated = good;
    truncated.resize(good.size() - 3);
    EXPECT_EQ(offset_of(truncated), 8u + len + 21u);

    auto broken_json = good;
    broken_json[8] = '#';
    EXPECT_EQ(offset_of(broken_json), 8u);

    auto over_white = good;
    over_white[8 + len + 2] = 0xff;
    over_white[8 + len + 3] = 0xff;  // second sample 0xffff > 4095
    EXPECT_EQ(offset_of(over_white), 8u + len + 2u);
}

TEST(Container, MessageNamesOffset) {
    try {
        decode_container(std::vector<std::uint8_t>{'R', 'N', 'C', '2', 0, 0, 0, 0});
        FAIL();
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("byte offset 0"), std::string::npos);
        EXPECT_EQ(e.kind(), "io");
    }
}

TEST(Container, FileRoundTrip) {
    fixture::TempDir dir;
    const auto file = sample_dn();
    write_container(dir / "a.rnc", file);
    EXPECT_EQ(read_container(dir / "a.rnc").dn(), file.dn());
    EXPECT_THROW(read_container(dir / "missing.rnc"), IoError);
}

TEST(ImportPlane, BarePlaneWithSidecar) {
    fixture::TempDir dir;
    const std::vector<std::uint8_t> plane{0x64, 0x02, 0x00, 0x02, 0x10, 0x00, 0xff, 0x03};
    write_bytes(dir / "p.raw", plane);
    write_json_file(dir / "p.json", {{"width", 2},
                                     {"height", 2},
                                     {"bit_depth", 12},
                                     {"cfa_pattern", "BGGR"},
                                     {"calibration", {{"gain", 2.0}, {"black_level", 512.0}}}});
    const auto file = import_plane(dir / "p.raw", dir / "p.json");
    EXPECT_EQ(file.dn().at(0, 0), 612);
    EXPECT_EQ(file.dn().at(1, 0), 512);
    EXPECT_EQ(file.dn().at(1, 1), 1023);
    EXPECT_EQ(file.cfa, CfaPattern::BGGR);
    EXPECT_DOUBLE_EQ(file.to_electrons().at(0, 0), 50.0);
}

TEST(ImportPlane, MissingSidecarIsAnError) {
    fixture::TempDir dir;
    write_bytes(dir / "p.raw", std::vector<std::uint8_t>(8, 0));
    EXPECT_THROW(import_plane(dir / "p.raw", dir / "p.json"), IoError);
}

TEST(ImportPlane, WrongPlaneSize) {
    fixture::TempDir dir;
    write_bytes(dir / "p.raw", std::vector<std::uint8_t>(6, 0));
    write_json_file(dir / "p.json", {{"width", 2},
                                     {"height", 2},
                                     {"bit_depth", 12},
                                     {"cfa_pattern", "BGGR"},
                                     {"calibration", {{"gain", 2.0}}}});
    EXPECT_THROW(import_plane(dir / "p.raw", dir / "p.json"), IoError);
}

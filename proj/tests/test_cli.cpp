#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "commands.hpp"
#include "fixtures.hpp"
#include "oracles/pairing_oracle.hpp"
#include "rawnight/json_io.hpp"

using namespace rawnight;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

json error_of(const Result& r) {
    const auto doc = json::parse(r.err);
    EXPECT_TRUE(doc.contains("error")) << r.err;
    return doc["error"];
}

std::string p(const fs::path& path) { return path.string(); }

}  // namespace

TEST(Cli, UsageErrorsAreStructured) {
    const auto r = run({"frobnicate"});
    EXPECT_NE(r.code, 0);
    EXPECT_EQ(error_of(r)["kind"], "usage");
    EXPECT_NE(run({}).code, 0);
}

TEST(Cli, ConvertRoundTrip) {
    fixture::TempDir dir;
    auto frame = oracle::flat_dn_frame(64, 32, 2.0, 512.0, 3.0, 400.0, 4);
    write_container(dir / "in.rnc", make_dn_file(frame, {2.0, 512.0, 3.0, 100}));
    ASSERT_EQ(run({"convert", p(dir / "in.rnc"), "--to", "electrons", "-o", p(dir / "e.rnc")}).code, 0);
    ASSERT_EQ(run({"convert", p(dir / "e.rnc"), "--to", "dn", "-o", p(dir / "back.rnc")}).code, 0);
    const auto e = read_container(dir / "e.rnc");
    EXPECT_EQ(e.payload(), PayloadKind::ElectronsF64);
    const auto back = read_container(dir / "back.rnc").dn();
    for (std::size_t i = 0; i < frame.size(); ++i) {
        ASSERT_LE(std::abs(int(back.data()[i]) - int(frame.data()[i])), 1);
    }
    // Converting the same input twice gives the same bytes.
    ASSERT_EQ(run({"convert", p(dir / "in.rnc"), "--to", "electrons", "-o", p(dir / "e2.rnc")}).code, 0);
    EXPECT_EQ(read_bytes(dir / "e.rnc"), read_bytes(dir / "e2.rnc"));
}

TEST(Cli, ConvertFlatFrameToElectrons) {
    fixture::TempDir dir;
    write_container(dir / "in.rnc",
                    make_dn_file(RawImage(4, 4, std::vector<std::uint16_t>(16, 612)),
                                 {2.0, 512.0, 0.0, 100}));
    ASSERT_EQ(run({"convert", p(dir / "in.rnc"), "--to", "electrons", "-o", p(dir / "e.rnc")}).code, 0);
    const auto file = read_container(dir / "e.rnc");
    for (double v : file.electrons().data()) EXPECT_EQ(v, 50.0);
}

TEST(Cli, ConvertImportAndErrors) {
    fixture::TempDir dir;
    write_bytes(dir / "p.raw", std::vector<std::uint8_t>{0x64, 0x02, 0x64, 0x02});
    auto r = run({"convert", p(dir / "p.raw"), "--sidecar", p(dir / "p.json"), "--to", "dn", "-o",
                  p(dir / "p.rnc")});
    EXPECT_NE(r.code, 0);
    EXPECT_EQ(error_of(r)["kind"], "io");

    write_json_file(dir / "p.json", {{"width", 2},
                                     {"height", 1},
                                     {"bit_depth", 14},
                                     {"cfa_pattern", "RGGB"},
                                     {"calibration", {{"gain", 2.0}, {"black_level", 512.0}}}});
    r = run({"convert", p(dir / "p.raw"), "--sidecar", p(dir / "p.json"), "--to", "electrons", "-o",
             p(dir / "p.rnc")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(read_container(dir / "p.rnc").electrons().at(1, 0), 50.0);

    write_bytes(dir / "bad.rnc", std::vector<std::uint8_t>{'R', 'N', 'C', '1', 200, 0, 0, 0, '{'});
    r = run({"convert", p(dir / "bad.rnc"), "--to", "electrons", "-o", p(dir / "x.rnc")});
    EXPECT_NE(r.code, 0);
    EXPECT_NE(error_of(r)["message"].get<std::string>().find("byte offset 4"), std::string::npos);
}

TEST(Cli, AugmentEmptyListSucceeds) {
    fixture::TempDir dir;
    write_json_file(dir / "jobs.json", {{"schema_version", 1}, {"master_seed", 0}, {"jobs", json::array()}});
    const auto r = run({"--out", p(dir / "out"), "augment", p(dir / "jobs.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto m = read_json_file(dir / "out" / "manifest.json");
    EXPECT_TRUE(m["entries"].empty());
    EXPECT_EQ(m["schema_version"], 1);
}

TEST(Cli, SampleTargetsThenAugment) {
    fixture::TempDir dir;
    AnnotationSet set;
    fixture::SceneOptions opt;
    opt.calib = {1.0, 256.0, 2.0, 100};
    fixture::add_scene(set, dir.path(), {800.0, 1200.0}, opt);
    write_json_file(dir / "ann.json", annotations_to_json(set));

    auto r = run({"--seed", "5", "--out", p(dir / "jobs.json"), "sample-targets", "--lo", "2",
                  "--hi", "200", "-n", "3", "--sources", p(dir / "ann.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto jobs = read_json_file(dir / "jobs.json");
    EXPECT_EQ(jobs["jobs"].size(), 6u);
    EXPECT_EQ(jobs["master_seed"], 5);

    r = run({"--jobs", "3", "--out", p(dir / "out1"), "augment", p(dir / "jobs.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    r = run({"--jobs", "1", "--out", p(dir / "out2"), "augment", p(dir / "jobs.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(fixture::read_text(dir / "out1" / "manifest.json"),
              fixture::read_text(dir / "out2" / "manifest.json"));
    const auto m = read_json_file(dir / "out1" / "manifest.json");
    for (const auto& e : m["entries"]) {
        const std::string file = e["output_path"];
        EXPECT_EQ(read_bytes(dir / "out1" / file), read_bytes(dir / "out2" / file));
    }
}

TEST(Cli, AugmentFailuresExitNonzero) {
    fixture::TempDir dir;
    AugmentationJob job;
    job.job_id = "j0";
    job.source_file = "missing.rnc";
    job.bbox = {0, 0, 2, 2};
    job.k = 0.5;
    job.seed = 1;
    write_json_file(dir / "jobs.json", jobs_to_json({job}, 0));
    const auto r = run({"--out", p(dir / "out"), "augment", p(dir / "jobs.json")});
    EXPECT_NE(r.code, 0);
    EXPECT_EQ(error_of(r)["kind"], "job");
    const auto m = read_json_file(dir / "out" / "manifest.json");
    EXPECT_EQ(m["entries"][0]["status"], "failed");
}

TEST(Cli, PartitionFiveThousandValues) {
    fixture::TempDir dir;
    std::vector<double> v;
    for (int i = 0; i < 5000; ++i) v.push_back(0.37 * i + 1.0);
    write_json_file(dir / "v.json", {{"schema_version", 1}, {"values", v}});
    const auto r = run({"partition", "--values", p(dir / "v.json"), "-n", "10"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = json::parse(r.out);
    EXPECT_EQ(doc["counts"], std::vector<int>(10, 500));
    EXPECT_TRUE(doc.contains("config_hash"));
}

TEST(Cli, PartitionErrorsAreStructured) {
    fixture::TempDir dir;
    write_json_file(dir / "v.json", json::array({1.0}));
    const auto r = run({"partition", "--values", p(dir / "v.json"), "-n", "3"});
    EXPECT_NE(r.code, 0);
    EXPECT_EQ(error_of(r)["kind"], "partition");
}

TEST(Cli, EvalPerfectFixture) {
    fixture::TempDir dir;
    json images = json::array(), anns = json::array(), dets = json::array();
    for (int i = 0; i < 4; ++i) {
        images.push_back({{"id", "im" + std::to_string(i)}});
        const json box = {10 * i, 0, 8, 8};
        anns.push_back({{"id", i}, {"image_id", "im" + std::to_string(i)}, {"bbox", box},
                        {"electron_mean", 1.0 + 10 * i}});
        dets.push_back({{"image_id", "im" + std::to_string(i)}, {"bbox", box}, {"score", 0.9}});
    }
    write_json_file(dir / "ann.json", {{"schema_version", 1}, {"images", images}, {"annotations", anns}});
    write_json_file(dir / "det.json", dets);

    auto r = run({"eval", "--detections", p(dir / "det.json"), "--annotations", p(dir / "ann.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json::parse(r.out)["map"], 1.0);

    r = run({"--out", p(dir / "rep"), "eval", "--detections", p(dir / "det.json"), "--annotations",
             p(dir / "ann.json"), "-n", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto report = read_json_file(dir / "rep" / "report.json");
    EXPECT_EQ(report["intervals"].size(), 2u);
    for (const auto& in : report["intervals"]) EXPECT_EQ(in["map"], 1.0);
    const auto csv = fixture::read_text(dir / "rep" / "report.csv");
    EXPECT_EQ(csv.rfind("interval,lo,hi,gt_count,tp50,fp50,fn50,iou_threshold,ap,map\n", 0), 0u);
}

TEST(Cli, PairMatchesExhaustiveMinimum) {
    fixture::TempDir dir;
    std::mt19937_64 gen(3);
    json images = json::array({{{"id", "day"}, {"light_condition", "normal"}},
                               {{"id", "night"}, {"light_condition", "low"}}});
    json anns = json::array();
    std::vector<double> a, b;
    for (int i = 0; i < 12; ++i) {
        const double w = 1 + gen() % 20, h = 1 + gen() % 20;
        const bool low = i >= 6;
        (low ? b : a).push_back(w * h);
        anns.push_back({{"id", i}, {"image_id", low ? "night" : "day"}, {"bbox", {0, 0, w, h}}});
    }
    write_json_file(dir / "ann.json", {{"schema_version", 1}, {"images", images}, {"annotations", anns}});
    const auto r = run({"pair", p(dir / "ann.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = json::parse(r.out);
    EXPECT_EQ(doc["pairs"].size(), 6u);
    EXPECT_EQ(doc["total_area_gap"].get<double>(), oracle::min_area_gap(a, b));
}

TEST(Cli, FitNoise) {
    fixture::TempDir dir;
    std::vector<std::string> args{"fit-noise"};
    int i = 0;
    for (double lambda : {50.0, 200.0, 800.0}) {
        const auto path = dir / ("f" + std::to_string(i++) + ".rnc");
        write_container(path, make_dn_file(oracle::flat_dn_frame(320, 320, 2.0, 512.0, 4.0, lambda, i),
                                           {2.0, 512.0, 4.0, 100}));
        args.push_back(p(path));
    }
    const auto r = run(args);
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = json::parse(r.out);
    EXPECT_NEAR(doc["gain_est"].get<double>(), 2.0, 0.1);
    EXPECT_NEAR(doc["read_noise_est"].get<double>(), 4.0, 0.5);
}

TEST(Cli, ConfigErrorsAreStructured) {
    fixture::TempDir dir;
    write_json_file(dir / "c.json", {{"schema_version", 1}, {"eval", {{"iou_thresholds", {0.9, 0.5}}}}});
    const auto r = run({"--config", p(dir / "c.json"), "partition", "--values", p(dir / "c.json")});
    EXPECT_NE(r.code, 0);
    EXPECT_EQ(error_of(r)["kind"], "config");
}

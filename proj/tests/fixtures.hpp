#pragma once

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

#include "oracles/sensor_sim.hpp"
#include "rawnight/container.hpp"
#include "rawnight/dataset.hpp"
#include "rawnight/json_io.hpp"

namespace fixture {

namespace fs = std::filesystem;

class TempDir {
public:
    explicit TempDir(const std::string& tag = "rawnight") {
        static std::atomic<int> counter{0};
        path_ = fs::temp_directory_path() /
                (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline std::string read_text(const fs::path& p) {
    const auto bytes = rawnight::read_bytes(p);
    return std::string(bytes.begin(), bytes.end());
}

struct SceneOptions {
    std::string prefix = "img";
    rawnight::SensorCalibration calib{2.0, 512.0, 4.0, 100};
    rawnight::LightCondition light = rawnight::LightCondition::Normal;
    std::size_t width = 32;
    std::size_t height = 32;
    std::uint64_t seed = 1;
};

// One flat Poisson frame per level, each holding one instance whose box size
// varies with its index. Containers are written as <prefix>-NNNN.rnc under dir.
inline void add_scene(rawnight::AnnotationSet& set, const fs::path& dir,
                      const std::vector<double>& lambdas, const SceneOptions& opt) {
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        char name[64];
        std::snprintf(name, sizeof(name), "%s-%04zu", opt.prefix.c_str(), i);
        const std::string file = std::string(name) + ".rnc";
        auto frame = oracle::flat_dn_frame(opt.width, opt.height, opt.calib.gain,
                                           opt.calib.black_level, opt.calib.read_noise_dn,
                                           lambdas[i], opt.seed * 1000003ULL + i);
        rawnight::write_container(dir / file, rawnight::make_dn_file(std::move(frame), opt.calib));

        rawnight::ImageRecord img;
        img.id = name;
        img.file = file;
        img.width = opt.width;
        img.height = opt.height;
        img.iso = opt.calib.iso;
        img.light_condition = opt.light;
        set.images.push_back(img);

        rawnight::Instance inst;
        inst.id = std::string(name) + "-obj";
        inst.image_id = name;
        const double w = 8.0 + static_cast<double>((i * 7) % 13);
        const double h = 8.0 + static_cast<double>((i * 5) % 11);
        inst.bbox = {2.0, 3.0, w, h};
        inst.iso = opt.calib.iso;
        inst.light_condition = opt.light;
        set.instances.push_back(inst);
    }
}

}  // namespace fixture

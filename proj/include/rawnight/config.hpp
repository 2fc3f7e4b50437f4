#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "rawnight/eval.hpp"
#include "rawnight/noise.hpp"

namespace rawnight {

inline constexpr const char* kSeedEnvVar = "RAWNIGHT_SEED";

struct RunPaths {
    std::filesystem::path input;
    std::filesystem::path output;
};

// One JSON document; CLI flags override individual fields.
struct RunConfig {
    std::optional<std::uint64_t> master_seed;
    IsoLadder iso_ladder;
    EvalConfig eval;
    RunPaths paths;

    // Throws ConfigError on invalid ladder entries or eval settings.
    void validate() const;
};

RunConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const RunConfig& config);
RunConfig load_config(const std::filesystem::path& path);

// 16 hex digits of FNV-1a over the canonical (sorted-key) serialization.
std::string config_hash(const RunConfig& config);

// Flag, then config file, then RAWNIGHT_SEED, then 0.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, const RunConfig& config);

}  // namespace rawnight

#include "rawnight/config.hpp"

#include <cstdio>
#include <cstdlib>

#include "rawnight/errors.hpp"
#include "rawnight/json_io.hpp"
#include "rawnight/rng.hpp"

namespace rawnight {

using nlohmann::json;

void RunConfig::validate() const {
    for (const auto& [iso, calib] : iso_ladder) {
        if (iso <= 0) {
            throw ConfigError("ISO ladder keys must be positive, got " + std::to_string(iso));
        }
        try {
            calib.validate();
        } catch (const CalibrationError& e) {
            throw ConfigError("ISO " + std::to_string(iso) + ": " + e.what());
        }
    }
    eval.validate();
}

RunConfig config_from_json(const json& doc) {
    check_schema_version(doc, "config");
    RunConfig config;
    try {
        if (doc.contains("master_seed")) {
            config.master_seed = seed_from_json(doc.at("master_seed"));
        }
        if (doc.contains("iso_ladder")) {
            for (const auto& [key, value] : doc.at("iso_ladder").items()) {
                int iso = 0;
                try {
                    std::size_t used = 0;
                    iso = std::stoi(key, &used);
                    if (used != key.size()) throw std::invalid_argument(key);
                } catch (const std::exception&) {
                    throw ConfigError("ISO ladder key '" + key + "' is not an integer");
                }
                auto calib = value.get<SensorCalibration>();
                calib.iso = iso;
                config.iso_ladder[iso] = calib;
            }
        }
        if (doc.contains("eval")) {
            config.eval = eval_config_from_json(doc.at("eval"));
        }
        if (doc.contains("paths")) {
            const auto& p = doc.at("paths");
            config.paths.input = p.value("input", std::string());
            config.paths.output = p.value("output", std::string());
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
    config.validate();
    return config;
}

json config_to_json(const RunConfig& config) {
    json ladder = json::object();
    for (const auto& [iso, calib] : config.iso_ladder) {
        ladder[std::to_string(iso)] = calib;
    }
    json doc = {{"schema_version", kSchemaVersion},
                {"iso_ladder", ladder},
                {"eval", eval_config_to_json(config.eval)},
                {"paths",
                 {{"input", config.paths.input.string()},
                  {"output", config.paths.output.string()}}}};
    if (config.master_seed) doc["master_seed"] = *config.master_seed;
    return doc;
}

RunConfig load_config(const std::filesystem::path& path) {
    return config_from_json(read_json_file(path));
}

std::string config_hash(const RunConfig& config) {
    // Paths do not change results; leave them out so reruns elsewhere agree.
    json doc = config_to_json(config);
    doc.erase("paths");
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(rng::hash_string(doc.dump())));
    return buf;
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, const RunConfig& config) {
    if (flag) return *flag;
    if (config.master_seed) return *config.master_seed;
    if (const char* env = std::getenv(kSeedEnvVar); env && *env) {
        try {
            return seed_from_json(json(std::string(env)));
        } catch (const InputError&) {
            throw ConfigError(std::string(kSeedEnvVar) + " must be an unsigned 64-bit decimal, got '" +
                              env + "'");
        }
    }
    return 0;
}

}  // namespace rawnight

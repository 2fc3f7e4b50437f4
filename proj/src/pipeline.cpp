#include "rawnight/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "rawnight/container.hpp"
#include "rawnight/errors.hpp"
#include "rawnight/json_io.hpp"
#include "rawnight/kernels.hpp"

namespace rawnight {

using nlohmann::json;

namespace {

json optional_number(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

// Per-pixel variance of the thinned frame in electrons, averaged over the box:
// thinning shot noise, read-noise compensation, and output quantization.
double predicted_variance(const ElectronMap& source, const PixelRect& rect,
                          const ThinningSpec& spec) {
    const double quantization = 1.0 / (12.0 * spec.dst_calib.gain * spec.dst_calib.gain);
    if (spec.mode == ThinMode::Naive) {
        return quantization;
    }
    double positive = 0.0;
    for (std::size_t y = rect.y0; y < rect.y1; ++y) {
        for (std::size_t x = rect.x0; x < rect.x1; ++x) {
            positive += std::max(source.at(x, y), 0.0);
        }
    }
    positive /= static_cast<double>(rect.count());
    return spec.k * (1.0 - spec.k) * positive +
           std::max(0.0, spec.read_noise_compensation()) + quantization;
}

ManifestEntry execute_job(const AugmentationJob& job, const AugmentOptions& options) {
    ManifestEntry entry;
    entry.job_id = job.job_id;
    entry.instance_id = job.instance_id;
    entry.k = job.k;
    entry.mode = job.mode;
    entry.gain_policy = describe(job.gain_policy);
    entry.target = job.target;
    try {
        const auto source = read_container(resolve_path(options.source_root, job.source_file));
        const auto electrons = source.to_electrons();

        ThinningSpec spec;
        spec.k = job.k;
        spec.mode = job.mode;
        spec.src_calib = source.calib;
        spec.dst_calib =
            adjust_gain_for_target(source.calib, job.k, job.gain_policy, options.ladder);
        spec.seed = job.seed;
        spec.validate();

        const auto rect = pixel_rect(job.bbox, electrons.width(), electrons.height());
        const auto thinned = thin(electrons, spec);
        auto image = electrons_to_dn(thinned, spec.dst_calib, source.bit_depth, source.cfa);

        const double realized = instance_electron_mean(dn_to_electrons(image, spec.dst_calib),
                                                       job.bbox);
        const double se = std::sqrt(predicted_variance(electrons, rect, spec) /
                                    static_cast<double>(rect.count()));

        json provenance = {{"job_id", job.job_id},
                           {"instance_id", job.instance_id},
                           {"source_file", job.source_file},
                           {"k", job.k},
                           {"mode", std::string(to_string(job.mode))},
                           {"gain_policy", gain_policy_to_json(job.gain_policy)},
                           {"seed", job.seed},
                           {"target", job.target}};
        entry.output_path = job.job_id + ".rnc";
        write_container(options.out_dir / entry.output_path,
                        make_dn_file(std::move(image), spec.dst_calib, std::move(provenance)));
        entry.realized_electron_mean = realized;
        entry.standard_error = se;
        entry.ok = true;
    } catch (const std::exception& e) {
        entry.ok = false;
        entry.error = e.what();
        entry.output_path.clear();
    }
    return entry;
}

}  // namespace

std::filesystem::path resolve_path(const std::filesystem::path& root, const std::string& file) {
    const std::filesystem::path p(file);
    return p.is_absolute() || root.empty() ? p : root / p;
}

void annotate_electron_means(AnnotationSet& set, const std::filesystem::path& raster_root) {
    std::map<std::string, ElectronMap> cache;
    for (auto& inst : set.instances) {
        if (inst.electron_mean) continue;
        auto it = cache.find(inst.image_id);
        if (it == cache.end()) {
            const auto& img = set.image(inst.image_id);
            if (img.file.empty()) {
                throw InputError("image '" + img.id + "' has no file to measure electrons from");
            }
            const auto file = read_container(resolve_path(raster_root, img.file));
            it = cache.emplace(inst.image_id, file.to_electrons()).first;
        }
        inst.electron_mean = instance_electron_mean(it->second, inst.bbox);
    }
}

bool Manifest::all_ok() const {
    return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.ok; });
}

json manifest_to_json(const Manifest& manifest) {
    json entries = json::array();
    for (const auto& e : manifest.entries) {
        json j = {{"job_id", e.job_id},
                  {"instance_id", e.instance_id},
                  {"status", e.ok ? "ok" : "failed"},
                  {"k", e.k},
                  {"mode", std::string(to_string(e.mode))},
                  {"gain_policy", e.gain_policy},
                  {"target", e.target},
                  {"realized_electron_mean", optional_number(e.realized_electron_mean)},
                  {"standard_error", optional_number(e.standard_error)},
                  {"output_path", e.output_path}};
        if (!e.ok) j["error"] = e.error;
        entries.push_back(std::move(j));
    }
    return {{"schema_version", kSchemaVersion},
            {"config_hash", manifest.config_hash},
            {"entries", entries}};
}

Manifest run_augment(const std::vector<AugmentationJob>& jobs, const AugmentOptions& options) {
    std::set<std::string_view> ids;
    for (const auto& job : jobs) {
        if (job.job_id.empty() || !ids.insert(job.job_id).second) {
            throw JobError("job ids must be unique and non-empty; offending id '" + job.job_id + "'");
        }
    }

    Manifest manifest;
    manifest.config_hash = options.config_hash;
    manifest.entries.resize(jobs.size());
    const int workers = std::max(1, options.workers);
    const auto n = static_cast<std::ptrdiff_t>(jobs.size());
#pragma omp parallel for num_threads(workers) schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        manifest.entries[i] = execute_job(jobs[i], options);
    }
    std::sort(manifest.entries.begin(), manifest.entries.end(),
              [](const auto& a, const auto& b) { return a.job_id < b.job_id; });
    return manifest;
}

}  // namespace rawnight

#include <algorithm>
#include <cmath>
#include <vector>

#include "rawnight/errors.hpp"
#include "rawnight/noise.hpp"

namespace rawnight {

namespace {

constexpr std::size_t kMinFrames = 3;
constexpr std::size_t kMinPixels = 10'000;
constexpr int kReweightPasses = 8;

struct Line {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_variance = 0.0;
};

Line weighted_line(const std::vector<double>& x, const std::vector<double>& y,
                   const std::vector<double>& w) {
    double sw = 0.0, sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sw += w[i];
        sx += w[i] * x[i];
        sy += w[i] * y[i];
    }
    const double xm = sx / sw;
    const double ym = sy / sw;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += w[i] * (x[i] - xm) * (x[i] - xm);
        sxy += w[i] * (x[i] - xm) * (y[i] - ym);
    }
    Line line;
    line.slope = sxy / sxx;
    line.intercept = ym - line.slope * xm;
    line.slope_variance = 1.0 / sxx;
    return line;
}

}  // namespace

FlatFrameStats flat_frame_stats(const RawImage& frame, double black_level) {
    FlatFrameStats stats;
    stats.count = frame.size();
    if (stats.count < 2) {
        throw FitError("flat frame needs at least two pixels");
    }
    double sum = 0.0;
    for (auto v : frame.data()) {
        sum += static_cast<double>(v);
    }
    const double mean = sum / static_cast<double>(stats.count);
    double ss = 0.0;
    for (auto v : frame.data()) {
        const double d = static_cast<double>(v) - mean;
        ss += d * d;
    }
    stats.mean_above_black = mean - black_level;
    stats.variance = ss / static_cast<double>(stats.count - 1);
    return stats;
}

NoiseFit fit_poisson_gaussian(std::span<const RawImage> frames, double black_level) {
    if (frames.size() < kMinFrames) {
        throw FitError("need at least " + std::to_string(kMinFrames) +
                       " flat frames, got " + std::to_string(frames.size()));
    }
    std::vector<double> means, vars, dof;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (frames[i].size() < kMinPixels) {
            throw FitError("flat frame " + std::to_string(i) + " has " +
                           std::to_string(frames[i].size()) + " pixels, need " +
                           std::to_string(kMinPixels));
        }
        const auto s = flat_frame_stats(frames[i], black_level);
        means.push_back(s.mean_above_black);
        vars.push_back(s.variance);
        dof.push_back(static_cast<double>(s.count - 1));
    }

    const auto [mn, mx] = std::minmax_element(means.begin(), means.end());
    if (!(*mx > *mn)) {
        throw FitError("degenerate fit: all flat frames have the same mean");
    }
    if (std::all_of(vars.begin(), vars.end(), [](double v) { return v == 0.0; })) {
        throw FitError("degenerate fit: flat frames carry no variance");
    }

    // Var(s^2) ~ 2 sigma^4 / (n - 1); weight by its inverse at the fitted sigma^2.
    const double var_floor =
        std::max(1e-12, *std::min_element(vars.begin(), vars.end(), [](double a, double b) {
            return (a > 0.0 ? a : INFINITY) < (b > 0.0 ? b : INFINITY);
        }));
    std::vector<double> weights(frames.size(), 1.0);
    Line line = weighted_line(means, vars, weights);
    for (int pass = 0; pass < kReweightPasses; ++pass) {
        for (std::size_t i = 0; i < means.size(); ++i) {
            const double fitted = std::max(line.slope * means[i] + line.intercept, var_floor);
            weights[i] = dof[i] / (2.0 * fitted * fitted);
        }
        line = weighted_line(means, vars, weights);
    }

    NoiseFit fit;
    fit.slope = line.slope;
    fit.intercept = line.intercept;
    fit.gain_est = std::max(line.slope, 0.0);
    fit.intercept_clamped = line.intercept < 0.0;
    fit.read_noise_est = std::sqrt(std::max(line.intercept, 0.0));
    fit.signal_independent = line.slope <= 3.0 * std::sqrt(line.slope_variance);

    double ss = 0.0, vsum = 0.0;
    for (std::size_t i = 0; i < means.size(); ++i) {
        const double r = vars[i] - (line.slope * means[i] + line.intercept);
        ss += r * r;
        vsum += vars[i];
    }
    const double n = static_cast<double>(means.size());
    fit.residual = std::sqrt(ss / n) / (vsum / n);
    return fit;
}

}  // namespace rawnight

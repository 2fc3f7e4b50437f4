#include <algorithm>
#include <cmath>
#include <vector>

#include "rawnight/kernels.hpp"
#include "rawnight/rng.hpp"

namespace rawnight::kernels {

namespace detail {

std::uint16_t quantize(double value, std::uint32_t white_level) noexcept {
    const double rounded = std::round(value);
    if (!(rounded > 0.0)) {
        return 0;
    }
    if (rounded >= static_cast<double>(white_level)) {
        return static_cast<std::uint16_t>(white_level);
    }
    return static_cast<std::uint16_t>(rounded);
}

double thin_gaussian_pixel(double x, double k, double read_var, std::uint64_t seed,
                           std::uint64_t index) noexcept {
    const double var = k * (1.0 - k) * std::max(x, 0.0) + read_var;
    if (!(var > 0.0)) {
        return k * x;
    }
    rng::Stream stream(seed, index);
    return k * x + std::sqrt(var) * stream.normal();
}

double thin_binomial_pixel(double x, double k, double read_var, std::uint64_t seed,
                           std::uint64_t index) noexcept {
    rng::Stream stream(seed, index);
    const auto n = static_cast<std::int64_t>(std::llround(std::max(x, 0.0)));
    double out = static_cast<double>(stream.binomial(n, k));
    if (read_var > 0.0) {
        out += std::sqrt(read_var) * stream.normal();
    }
    return out;
}

}  // namespace detail

namespace serial {

void dn_to_electrons(std::span<const std::uint16_t> dn, double gain, double black,
                     std::span<double> out) {
    for (std::size_t i = 0; i < dn.size(); ++i) {
        out[i] = (static_cast<double>(dn[i]) - black) / gain;
    }
}

void electrons_to_dn(std::span<const double> electrons, double gain, double black,
                     std::uint32_t white_level, std::span<std::uint16_t> out) {
    for (std::size_t i = 0; i < electrons.size(); ++i) {
        out[i] = detail::quantize(gain * electrons[i] + black, white_level);
    }
}

void scale(std::span<const double> electrons, double k, std::span<double> out) {
    for (std::size_t i = 0; i < electrons.size(); ++i) {
        out[i] = k * electrons[i];
    }
}

void thin_gaussian(std::span<const double> electrons, double k, double read_var,
                   std::uint64_t seed, std::span<double> out) {
    for (std::size_t i = 0; i < electrons.size(); ++i) {
        out[i] = detail::thin_gaussian_pixel(electrons[i], k, read_var, seed, i);
    }
}

void thin_binomial(std::span<const double> electrons, double k, double read_var,
                   std::uint64_t seed, std::span<double> out) {
    for (std::size_t i = 0; i < electrons.size(); ++i) {
        out[i] = detail::thin_binomial_pixel(electrons[i], k, read_var, seed, i);
    }
}

// Row sums first, then rows in order: the omp variant reproduces this exactly.
double box_sum(std::span<const double> plane, std::size_t stride, const PixelRect& rect) {
    double total = 0.0;
    for (std::size_t y = rect.y0; y < rect.y1; ++y) {
        double row = 0.0;
        for (std::size_t x = rect.x0; x < rect.x1; ++x) {
            row += plane[y * stride + x];
        }
        total += row;
    }
    return total;
}

BoxMoments box_moments(std::span<const double> plane, std::size_t stride,
                       const PixelRect& rect) {
    BoxMoments m;
    m.count = rect.count();
    if (m.count == 0) {
        return m;
    }
    m.mean = box_sum(plane, stride, rect) / static_cast<double>(m.count);
    double total = 0.0;
    for (std::size_t y = rect.y0; y < rect.y1; ++y) {
        double row = 0.0;
        for (std::size_t x = rect.x0; x < rect.x1; ++x) {
            const double d = plane[y * stride + x] - m.mean;
            row += d * d;
        }
        total += row;
    }
    m.variance = total / static_cast<double>(m.count);
    return m;
}

}  // namespace serial

}  // namespace rawnight::kernels

#include <cstddef>
#include <vector>

#include "rawnight/kernels.hpp"

namespace rawnight::kernels::omp {

namespace {

using Index = std::ptrdiff_t;

Index ssize(std::size_t n) { return static_cast<Index>(n); }

}  // namespace

void dn_to_electrons(std::span<const std::uint16_t> dn, double gain, double black,
                     std::span<double> out) {
    const Index n = ssize(dn.size());
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i) {
        out[i] = (static_cast<double>(dn[i]) - black) / gain;
    }
}

void electrons_to_dn(std::span<const double> electrons, double gain, double black,
                     std::uint32_t white_level, std::span<std::uint16_t> out) {
    const Index n = ssize(electrons.size());
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i) {
        out[i] = detail::quantize(gain * electrons[i] + black, white_level);
    }
}

void scale(std::span<const double> electrons, double k, std::span<double> out) {
    const Index n = ssize(electrons.size());
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i) {
        out[i] = k * electrons[i];
    }
}

void thin_gaussian(std::span<const double> electrons, double k, double read_var,
                   std::uint64_t seed, std::span<double> out) {
    const Index n = ssize(electrons.size());
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i) {
        out[i] = detail::thin_gaussian_pixel(electrons[i], k, read_var, seed,
                                             static_cast<std::uint64_t>(i));
    }
}

void thin_binomial(std::span<const double> electrons, double k, double read_var,
                   std::uint64_t seed, std::span<double> out) {
    const Index n = ssize(electrons.size());
    // Rejection loops make per-pixel cost uneven.
#pragma omp parallel for schedule(dynamic, 4096)
    for (Index i = 0; i < n; ++i) {
        out[i] = detail::thin_binomial_pixel(electrons[i], k, read_var, seed,
                                             static_cast<std::uint64_t>(i));
    }
}

double box_sum(std::span<const double> plane, std::size_t stride, const PixelRect& rect) {
    const Index rows = ssize(rect.height());
    std::vector<double> row_sums(rect.height(), 0.0);
#pragma omp parallel for schedule(static)
    for (Index r = 0; r < rows; ++r) {
        const std::size_t y = rect.y0 + static_cast<std::size_t>(r);
        double row = 0.0;
        for (std::size_t x = rect.x0; x < rect.x1; ++x) {
            row += plane[y * stride + x];
        }
        row_sums[r] = row;
    }
    double total = 0.0;
    for (double s : row_sums) {
        total += s;
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
    const Index rows = ssize(rect.height());
    std::vector<double> row_sums(rect.height(), 0.0);
#pragma omp parallel for schedule(static)
    for (Index r = 0; r < rows; ++r) {
        const std::size_t y = rect.y0 + static_cast<std::size_t>(r);
        double row = 0.0;
        for (std::size_t x = rect.x0; x < rect.x1; ++x) {
            const double d = plane[y * stride + x] - m.mean;
            row += d * d;
        }
        row_sums[r] = row;
    }
    double total = 0.0;
    for (double s : row_sums) {
        total += s;
    }
    m.variance = total / static_cast<double>(m.count);
    return m;
}

}  // namespace rawnight::kernels::omp

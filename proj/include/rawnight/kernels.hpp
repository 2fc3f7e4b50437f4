#pragma once

// Per-pixel kernels behind the public operations.
//
// Each kernel exists twice with identical signatures: `serial` is the plain
// reference loop, `omp` is the OpenMP version used in production. Both must
// produce bit-identical results for every thread count; the kernel tests and
// the benchmark compare them directly.

#include <cstdint>
#include <span>

#include "rawnight/geometry.hpp"

namespace rawnight::kernels {

// Mean and (population) variance over a rectangle of a row-major plane.
struct BoxMoments {
    double mean = 0.0;
    double variance = 0.0;
    std::size_t count = 0;
};

#define RAWNIGHT_KERNEL_DECLS                                                          \
    void dn_to_electrons(std::span<const std::uint16_t> dn, double gain, double black, \
                         std::span<double> out);                                        \
    void electrons_to_dn(std::span<const double> electrons, double gain, double black, \
                         std::uint32_t white_level, std::span<std::uint16_t> out);      \
    void scale(std::span<const double> electrons, double k, std::span<double> out);    \
    void thin_gaussian(std::span<const double> electrons, double k, double read_var,   \
                       std::uint64_t seed, std::span<double> out);                      \
    void thin_binomial(std::span<const double> electrons, double k, double read_var,   \
                       std::uint64_t seed, std::span<double> out);                      \
    double box_sum(std::span<const double> plane, std::size_t stride,                  \
                   const PixelRect& rect);                                              \
    BoxMoments box_moments(std::span<const double> plane, std::size_t stride,          \
                           const PixelRect& rect);

namespace serial {
RAWNIGHT_KERNEL_DECLS
}  // namespace serial

namespace omp {
RAWNIGHT_KERNEL_DECLS
}  // namespace omp

#undef RAWNIGHT_KERNEL_DECLS

// Shared scalar pieces, so the two variants cannot drift apart.
namespace detail {

// round half away from zero, then clamp into [0, white_level].
std::uint16_t quantize(double value, std::uint32_t white_level) noexcept;

double thin_gaussian_pixel(double x, double k, double read_var, std::uint64_t seed,
                           std::uint64_t index) noexcept;
double thin_binomial_pixel(double x, double k, double read_var, std::uint64_t seed,
                           std::uint64_t index) noexcept;

}  // namespace detail

}  // namespace rawnight::kernels

#pragma once

#include <cstddef>

namespace rawnight {

// Axis-aligned box (x, y, w, h) in pixel units; covers [x, x+w) x [y, y+h).
struct BBox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    double area() const noexcept { return w * h; }

    friend bool operator==(const BBox&, const BBox&) = default;
};

// Integer pixel rectangle [x0, x1) x [y0, y1).
struct PixelRect {
    std::size_t x0 = 0;
    std::size_t y0 = 0;
    std::size_t x1 = 0;
    std::size_t y1 = 0;

    std::size_t width() const noexcept { return x1 - x0; }
    std::size_t height() const noexcept { return y1 - y0; }
    std::size_t count() const noexcept { return width() * height(); }
};

// Pixels touched by a box: floor of the near edge to ceil of the far edge.
// Throws GeometryError if the result is empty or leaves a width x height frame.
PixelRect pixel_rect(const BBox& box, std::size_t width, std::size_t height);

// Same, but clips to the frame instead of rejecting; throws only if nothing remains.
PixelRect clipped_pixel_rect(const BBox& box, std::size_t width, std::size_t height);

}  // namespace rawnight

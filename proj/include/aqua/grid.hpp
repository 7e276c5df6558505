#pragma once

#include <cstdint>
#include <string>

namespace aqua {

// Georeferenced pixel grid. origin_x/origin_y is the map coordinate of the
// upper-left corner of pixel (0,0); rows step southwards, so the map y of a
// pixel decreases as its row index grows. Pixel sizes are positive.
struct GridRef {
    double origin_x = 0.0;
    double origin_y = 0.0;
    double pixel_size_x = 1.0;
    double pixel_size_y = 1.0;
    uint32_t width = 0;
    uint32_t height = 0;
    std::string crs_tag;

    bool operator==(const GridRef&) const = default;

    double center_x(uint32_t col) const { return origin_x + (col + 0.5) * pixel_size_x; }
    double center_y(uint32_t row) const { return origin_y - (row + 0.5) * pixel_size_y; }
};

// Throws std::invalid_argument on zero dimensions or non-positive pixel size.
void validate(const GridRef& g);

// Two grids can be composited when they share a crs and resolution and their
// origins differ by a whole number of pixels.
bool composable(const GridRef& a, const GridRef& b);

// Position of b's pixel (0,0) inside a's grid. Precondition: composable(a,b).
struct PixelOffset {
    int64_t col = 0;
    int64_t row = 0;
};
PixelOffset offset_between(const GridRef& a, const GridRef& b);

// Smallest grid covering both inputs. Precondition: composable(a,b).
GridRef grid_union(const GridRef& a, const GridRef& b);

}  // namespace aqua

#include "aqua/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aqua {

namespace {

bool near_integer(double v, double tol = 1e-6) {
    return std::fabs(v - std::round(v)) <= tol;
}

bool same_scale(double a, double b) {
    return std::fabs(a - b) <= 1e-9 * std::max(std::fabs(a), std::fabs(b));
}

}  // namespace

void validate(const GridRef& g) {
    if (g.width == 0 || g.height == 0)
        throw std::invalid_argument("grid has zero extent");
    if (!(g.pixel_size_x > 0.0) || !(g.pixel_size_y > 0.0))
        throw std::invalid_argument("grid pixel size must be positive");
}

bool composable(const GridRef& a, const GridRef& b) {
    if (a.crs_tag != b.crs_tag) return false;
    if (!same_scale(a.pixel_size_x, b.pixel_size_x) ||
        !same_scale(a.pixel_size_y, b.pixel_size_y))
        return false;
    return near_integer((b.origin_x - a.origin_x) / a.pixel_size_x) &&
           near_integer((a.origin_y - b.origin_y) / a.pixel_size_y);
}

PixelOffset offset_between(const GridRef& a, const GridRef& b) {
    if (!composable(a, b))
        throw std::invalid_argument("grids are not composable");
    return {int64_t(std::llround((b.origin_x - a.origin_x) / a.pixel_size_x)),
            int64_t(std::llround((a.origin_y - b.origin_y) / a.pixel_size_y))};
}

GridRef grid_union(const GridRef& a, const GridRef& b) {
    const PixelOffset off = offset_between(a, b);
    const int64_t col0 = std::min<int64_t>(0, off.col);
    const int64_t row0 = std::min<int64_t>(0, off.row);
    const int64_t col1 = std::max<int64_t>(a.width, off.col + b.width);
    const int64_t row1 = std::max<int64_t>(a.height, off.row + b.height);
    GridRef u = a;
    u.origin_x = a.origin_x + double(col0) * a.pixel_size_x;
    u.origin_y = a.origin_y - double(row0) * a.pixel_size_y;
    u.width = uint32_t(col1 - col0);
    u.height = uint32_t(row1 - row0);
    return u;
}

}  // namespace aqua

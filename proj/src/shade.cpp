#include "aqua/shade.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace aqua {

namespace {

constexpr double kRadToDeg = 180.0 / 3.14159265358979323846;

// 8-connected component labelling with an explicit stack.
std::vector<int32_t> label_components(const ShadeMask& m, int32_t& count) {
    const uint32_t w = m.width(), h = m.height();
    std::vector<int32_t> label(size_t(w) * h, -1);
    count = 0;
    std::vector<std::pair<uint32_t, uint32_t>> stack;
    for (uint32_t y = 0; y < h; ++y) {
        for (uint32_t x = 0; x < w; ++x) {
            if (m.at(x, y) != 1 || label[size_t(y) * w + x] >= 0) continue;
            const int32_t id = count++;
            stack.push_back({x, y});
            label[size_t(y) * w + x] = id;
            while (!stack.empty()) {
                const auto [cx, cy] = stack.back();
                stack.pop_back();
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        const int64_t nx = int64_t(cx) + dx, ny = int64_t(cy) + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        size_t idx = size_t(ny) * w + size_t(nx);
                        if (m.at(uint32_t(nx), uint32_t(ny)) == 1 && label[idx] < 0) {
                            label[idx] = id;
                            stack.push_back({uint32_t(nx), uint32_t(ny)});
                        }
                    }
                }
            }
        }
    }
    return label;
}

struct Pt {
    int64_t x, y;
};

int64_t cross(Pt o, Pt a, Pt b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Andrew's monotone chain; returns the hull counter-clockwise without
// collinear points. Degenerate inputs give 1 or 2 vertices.
std::vector<Pt> convex_hull(std::vector<Pt> pts) {
    std::sort(pts.begin(), pts.end(),
              [](Pt a, Pt b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](Pt a, Pt b) { return a.x == b.x && a.y == b.y; }),
              pts.end());
    const size_t n = pts.size();
    if (n <= 2) return pts;
    std::vector<Pt> hull(2 * n);
    size_t k = 0;
    for (size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    const size_t lower = k + 1;
    for (size_t i = n - 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

// Exact integer point-in-convex-polygon test, boundary inclusive.
bool inside_hull(const std::vector<Pt>& hull, Pt p) {
    if (hull.empty()) return false;
    if (hull.size() == 1) return p.x == hull[0].x && p.y == hull[0].y;
    if (hull.size() == 2) {
        const Pt a = hull[0], b = hull[1];
        if (cross(a, b, p) != 0) return false;
        const int64_t dot = (p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y);
        const int64_t len2 = (b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y);
        return dot >= 0 && dot <= len2;
    }
    // The hull is counter-clockwise, so interior points sit left of every edge.
    for (size_t i = 0; i < hull.size(); ++i) {
        const Pt a = hull[i], b = hull[(i + 1) % hull.size()];
        if (cross(a, b, p) < 0) return false;
    }
    return true;
}

// One pass of hull filling; reports whether any pixel flipped to 1.
bool hull_pass(const ShadeMask& in, ShadeMask& out) {
    const uint32_t w = in.width(), h = in.height();
    int32_t count = 0;
    const std::vector<int32_t> label = label_components(in, count);
    std::vector<std::vector<Pt>> points(static_cast<size_t>(count));
    for (uint32_t y = 0; y < h; ++y)
        for (uint32_t x = 0; x < w; ++x) {
            const int32_t id = label[size_t(y) * w + x];
            if (id >= 0) points[size_t(id)].push_back({int64_t(x), int64_t(y)});
        }
    out = in;
    bool changed = false;
    for (const auto& comp : points) {
        const std::vector<Pt> hull = convex_hull(comp);
        int64_t min_x = comp[0].x, max_x = comp[0].x, min_y = comp[0].y, max_y = comp[0].y;
        for (Pt p : comp) {
            min_x = std::min(min_x, p.x);
            max_x = std::max(max_x, p.x);
            min_y = std::min(min_y, p.y);
            max_y = std::max(max_y, p.y);
        }
        for (int64_t y = min_y; y <= max_y; ++y)
            for (int64_t x = min_x; x <= max_x; ++x) {
                if (out.at(uint32_t(x), uint32_t(y)) == 1) continue;
                if (inside_hull(hull, {x, y})) {
                    out.at(uint32_t(x), uint32_t(y)) = 1;
                    changed = true;
                }
            }
    }
    return changed;
}

}  // namespace

DemRaster aggregate_min(const DemRaster& dem, uint32_t factor) {
    if (factor == 0) throw std::invalid_argument("aggregation factor must be positive");
    GridRef g = dem.grid();
    g.pixel_size_x *= factor;
    g.pixel_size_y *= factor;
    g.width = (dem.width() + factor - 1) / factor;
    g.height = (dem.height() + factor - 1) / factor;
    DemRaster out(g, 1, dem.nodata());
    for (uint32_t by = 0; by < g.height; ++by) {
        for (uint32_t bx = 0; bx < g.width; ++bx) {
            float best = dem.nodata();
            bool seen = false;
            for (uint32_t dy = 0; dy < factor; ++dy) {
                for (uint32_t dx = 0; dx < factor; ++dx) {
                    const uint64_t x = uint64_t(bx) * factor + dx;
                    const uint64_t y = uint64_t(by) * factor + dy;
                    if (x >= dem.width() || y >= dem.height()) continue;
                    const float v = dem.at(uint32_t(x), uint32_t(y));
                    if (v == dem.nodata()) continue;
                    best = seen ? std::min(best, v) : v;
                    seen = true;
                }
            }
            if (seen) out.at(bx, by) = best;
        }
    }
    return out;
}

FloatRaster slope_degrees(const DemRaster& dem) {
    const GridRef& g = dem.grid();
    if (std::fabs(g.pixel_size_x - g.pixel_size_y) >
        1e-9 * std::max(g.pixel_size_x, g.pixel_size_y))
        throw std::invalid_argument("slope requires square pixels");
    if (g.width < 3 || g.height < 3)
        throw std::invalid_argument("slope requires at least a 3x3 raster");
    const double cell = g.pixel_size_x;
    FloatRaster out(g, 1, kElevationNoData);

    // Neighbour fetch with edge replication; nodata neighbours fall back to
    // the center value so they do not drag the gradient.
    auto z = [&](int64_t x, int64_t y, float center) {
        x = std::clamp<int64_t>(x, 0, g.width - 1);
        y = std::clamp<int64_t>(y, 0, g.height - 1);
        const float v = dem.at(uint32_t(x), uint32_t(y));
        return v == dem.nodata() ? double(center) : double(v);
    };

    for (uint32_t y = 0; y < g.height; ++y) {
        for (uint32_t x = 0; x < g.width; ++x) {
            const float c = dem.at(x, y);
            if (c == dem.nodata()) continue;
            const int64_t xi = x, yi = y;
            const double dzdx =
                ((z(xi + 1, yi - 1, c) + 2.0 * z(xi + 1, yi, c) + z(xi + 1, yi + 1, c)) -
                 (z(xi - 1, yi - 1, c) + 2.0 * z(xi - 1, yi, c) + z(xi - 1, yi + 1, c))) /
                (8.0 * cell);
            const double dzdy =
                ((z(xi - 1, yi + 1, c) + 2.0 * z(xi, yi + 1, c) + z(xi + 1, yi + 1, c)) -
                 (z(xi - 1, yi - 1, c) + 2.0 * z(xi, yi - 1, c) + z(xi + 1, yi - 1, c))) /
                (8.0 * cell);
            out.at(x, y) = float(std::atan(std::hypot(dzdx, dzdy)) * kRadToDeg);
        }
    }
    return out;
}

ShadeMask threshold_slope(const FloatRaster& slope, double threshold_deg) {
    ShadeMask out(slope.grid(), 1, kMaskNoData);
    for (uint32_t y = 0; y < slope.height(); ++y)
        for (uint32_t x = 0; x < slope.width(); ++x) {
            const float v = slope.at(x, y);
            out.at(x, y) = (v != slope.nodata() && double(v) > threshold_deg) ? 1 : 0;
        }
    return out;
}

ShadeMask fill_holes(const ShadeMask& m) {
    const uint32_t w = m.width(), h = m.height();
    // Flood the 4-connected background from every border pixel; what the
    // flood cannot reach is enclosed and gets masked.
    std::vector<uint8_t> outside(size_t(w) * h, 0);
    std::vector<std::pair<uint32_t, uint32_t>> stack;
    auto push = [&](uint32_t x, uint32_t y) {
        const size_t idx = size_t(y) * w + x;
        if (m.at(x, y) != 1 && !outside[idx]) {
            outside[idx] = 1;
            stack.push_back({x, y});
        }
    };
    for (uint32_t x = 0; x < w; ++x) {
        push(x, 0);
        push(x, h - 1);
    }
    for (uint32_t y = 0; y < h; ++y) {
        push(0, y);
        push(w - 1, y);
    }
    while (!stack.empty()) {
        const auto [x, y] = stack.back();
        stack.pop_back();
        if (x > 0) push(x - 1, y);
        if (x + 1 < w) push(x + 1, y);
        if (y > 0) push(x, y - 1);
        if (y + 1 < h) push(x, y + 1);
    }
    ShadeMask out(m.grid(), 1, kMaskNoData);
    for (uint32_t y = 0; y < h; ++y)
        for (uint32_t x = 0; x < w; ++x)
            out.at(x, y) = (m.at(x, y) == 1 || !outside[size_t(y) * w + x]) ? 1 : 0;
    return out;
}

ShadeMask convex_hull_components(const ShadeMask& m) {
    // Filling one hull can bridge two components into a bigger one whose hull
    // covers more ground, so iterate until nothing changes. Pixels only ever
    // turn on, which bounds the loop.
    ShadeMask current = m;
    for (;;) {
        ShadeMask next;
        if (!hull_pass(current, next)) return next;
        current = std::move(next);
    }
}

ShadeMask project_mask(const ShadeMask& m, const GridRef& target) {
    if (m.grid().crs_tag != target.crs_tag)
        throw std::invalid_argument("cannot project between different crs tags");
    validate(target);
    ShadeMask out(target, 1, kMaskNoData);
    const GridRef& src = m.grid();
    for (uint32_t y = 0; y < target.height; ++y) {
        for (uint32_t x = 0; x < target.width; ++x) {
            const double cx = target.center_x(x);
            const double cy = target.center_y(y);
            const int64_t sc = int64_t(std::floor((cx - src.origin_x) / src.pixel_size_x));
            const int64_t sr = int64_t(std::floor((src.origin_y - cy) / src.pixel_size_y));
            uint8_t v = 0;
            if (sc >= 0 && sr >= 0 && sc < src.width && sr < src.height)
                v = m.at(uint32_t(sc), uint32_t(sr)) == 1 ? 1 : 0;
            out.at(x, y) = v;
        }
    }
    return out;
}

ShadeMask apply_override(const ShadeMask& m, const ShadeMask& keep) {
    if (keep.grid() != m.grid())
        throw std::invalid_argument("override mask grid does not match");
    ShadeMask out = m;
    for (uint32_t y = 0; y < m.height(); ++y)
        for (uint32_t x = 0; x < m.width(); ++x)
            if (keep.at(x, y) == 1) out.at(x, y) = 0;
    return out;
}

ShadeMask build_shade_mask(const DemRaster& dem, const ShadeParams& params,
                           const GridRef& target, const ShadeMask* override_keep) {
    const DemRaster coarse = aggregate_min(dem, params.aggregate_factor);
    const FloatRaster slope = slope_degrees(coarse);
    ShadeMask mask = threshold_slope(slope, params.slope_threshold_deg);
    mask = fill_holes(mask);
    mask = convex_hull_components(mask);
    ShadeMask projected = project_mask(mask, target);
    if (override_keep) projected = apply_override(projected, *override_keep);
    return projected;
}

}  // namespace aqua

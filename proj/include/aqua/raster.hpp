#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "aqua/date.hpp"
#include "aqua/grid.hpp"

namespace aqua {

// Nodata conventions used across the pipeline. Quantized backscatter reserves
// byte 0; categorical masks reserve 255; float rasters carry their own value.
inline constexpr uint8_t kBackscatterNoData = 0;
inline constexpr uint8_t kMaskNoData = 255;
inline constexpr float kElevationNoData = -9999.0f;
inline constexpr float kProbabilityNoData = -1.0f;
inline constexpr float kPercentNoData = -1.0f;

// In-memory raster: band-sequential, row-major, one grid shared by all bands.
template <typename T>
class Raster {
public:
    Raster() = default;

    Raster(GridRef grid, int bands, T nodata)
        : grid_(std::move(grid)), bands_(bands), nodata_(nodata) {
        validate(grid_);
        if (bands_ < 1) throw std::invalid_argument("raster needs at least one band");
        data_.assign(size_t(grid_.width) * grid_.height * size_t(bands_), nodata_);
    }

    const GridRef& grid() const { return grid_; }
    GridRef& grid() { return grid_; }
    uint32_t width() const { return grid_.width; }
    uint32_t height() const { return grid_.height; }
    int bands() const { return bands_; }
    T nodata() const { return nodata_; }
    size_t pixels() const { return size_t(grid_.width) * grid_.height; }

    T& at(uint32_t col, uint32_t row, int band = 0) {
        return data_[size_t(band) * pixels() + size_t(row) * grid_.width + col];
    }
    T at(uint32_t col, uint32_t row, int band = 0) const {
        return data_[size_t(band) * pixels() + size_t(row) * grid_.width + col];
    }

    bool is_nodata(uint32_t col, uint32_t row, int band = 0) const {
        return at(col, row, band) == nodata_;
    }

    std::vector<T>& values() { return data_; }
    const std::vector<T>& values() const { return data_; }

private:
    GridRef grid_;
    int bands_ = 0;
    T nodata_ = T();
    std::vector<T> data_;
};

using ByteRaster = Raster<uint8_t>;
using FloatRaster = Raster<float>;

// Dual-pol backscatter scene: band 0 = VH, band 1 = VV, both quantized dB.
using BackscatterRaster = ByteRaster;
// Per-pixel water probability in (0,1), nodata kProbabilityNoData.
using ProbabilityRaster = FloatRaster;
// Binary water mask: 0 land, 1 water, 255 nodata.
using MaskRaster = ByteRaster;

// A water mask bound to its observation (or window) date.
struct WaterMask {
    MaskRaster raster;
    Date date;
};

// dB backscatter to stored byte: clamp to [-49, +1], shift and scale so the
// result lands in [5, 255]. Byte 0 stays reserved for nodata. Rounding is
// half away from zero.
inline uint8_t quantize_db(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("backscatter value is not finite");
    const double clamped = std::max(-49.0, std::min(1.0, x));
    return uint8_t(std::lround((clamped + 50.0) * 5.0));
}

inline double dequantize_db(uint8_t v) {
    if (v == kBackscatterNoData) throw std::invalid_argument("cannot dequantize a nodata byte");
    return double(v) / 5.0 - 50.0;
}

// Top-left corner of a tile inside its source raster.
struct TilePlacement {
    uint32_t col = 0;
    uint32_t row = 0;
};

// Tile origins along one axis: regular steps of (tile - 2*overlap), with the
// final origin pulled back so the last tile ends exactly at the edge. Callers
// pad the raster first; a dimension smaller than the tile is an error.
inline std::vector<uint32_t> tile_origins(uint32_t dim, uint32_t tile, uint32_t overlap) {
    if (tile == 0 || tile <= 2 * overlap)
        throw std::invalid_argument("tile size must exceed twice the overlap");
    if (dim < tile)
        throw std::invalid_argument("raster dimension smaller than tile size");
    const uint32_t stride = tile - 2 * overlap;
    std::vector<uint32_t> origins;
    for (uint32_t o = 0;; o += stride) {
        origins.push_back(std::min(o, dim - tile));
        if (o + tile >= dim) break;
    }
    return origins;
}

inline std::vector<TilePlacement> tile_placements(uint32_t width, uint32_t height,
                                                  uint32_t tile, uint32_t overlap) {
    const std::vector<uint32_t> cols = tile_origins(width, tile, overlap);
    const std::vector<uint32_t> rows = tile_origins(height, tile, overlap);
    std::vector<TilePlacement> out;
    out.reserve(cols.size() * rows.size());
    for (uint32_t r : rows)
        for (uint32_t c : cols) out.push_back({c, r});
    return out;
}

template <typename T>
Raster<T> crop(const Raster<T>& src, uint32_t col, uint32_t row, uint32_t w, uint32_t h) {
    if (col + uint64_t(w) > src.width() || row + uint64_t(h) > src.height())
        throw std::invalid_argument("crop window exceeds raster extent");
    GridRef g = src.grid();
    g.origin_x += double(col) * g.pixel_size_x;
    g.origin_y -= double(row) * g.pixel_size_y;
    g.width = w;
    g.height = h;
    Raster<T> out(g, src.bands(), src.nodata());
    for (int b = 0; b < src.bands(); ++b)
        for (uint32_t y = 0; y < h; ++y)
            for (uint32_t x = 0; x < w; ++x)
                out.at(x, y, b) = src.at(col + x, row + y, b);
    return out;
}

template <typename T>
Raster<T> extract_tile(const Raster<T>& src, TilePlacement p, uint32_t tile) {
    return crop(src, p.col, p.row, tile, tile);
}

// Cover the raster with overlapping tiles of the given size.
template <typename T>
std::vector<std::pair<Raster<T>, TilePlacement>> retile(const Raster<T>& src, uint32_t tile,
                                                        uint32_t overlap) {
    std::vector<std::pair<Raster<T>, TilePlacement>> out;
    for (TilePlacement p : tile_placements(src.width(), src.height(), tile, overlap))
        out.emplace_back(extract_tile(src, p, tile), p);
    return out;
}

// Grow the raster to target_w x target_h plus a border on every side. The
// original content sits at (border, border); new pixels hold `fill`. The grid
// origin shifts so existing pixels keep their map coordinates.
template <typename T>
Raster<T> pad_to(const Raster<T>& src, uint32_t target_w, uint32_t target_h, uint32_t border,
                 T fill) {
    if (target_w < src.width() || target_h < src.height())
        throw std::invalid_argument("pad target smaller than raster");
    GridRef g = src.grid();
    g.origin_x -= double(border) * g.pixel_size_x;
    g.origin_y += double(border) * g.pixel_size_y;
    g.width = target_w + 2 * border;
    g.height = target_h + 2 * border;
    Raster<T> out(g, src.bands(), src.nodata());
    std::fill(out.values().begin(), out.values().end(), fill);
    for (int b = 0; b < src.bands(); ++b)
        for (uint32_t y = 0; y < src.height(); ++y)
            for (uint32_t x = 0; x < src.width(); ++x)
                out.at(border + x, border + y, b) = src.at(x, y, b);
    return out;
}

enum class ResampleRule { any_water, majority };

// Aggregate a binary mask by an integer factor. Blocks that are entirely
// nodata stay nodata; under `majority` a block is water only when water
// pixels outnumber half of its valid pixels strictly.
inline MaskRaster resample_mask(const MaskRaster& src, uint32_t factor, ResampleRule rule) {
    if (factor == 0) throw std::invalid_argument("resample factor must be positive");
    GridRef g = src.grid();
    g.pixel_size_x *= factor;
    g.pixel_size_y *= factor;
    g.width = (src.width() + factor - 1) / factor;
    g.height = (src.height() + factor - 1) / factor;
    MaskRaster out(g, 1, kMaskNoData);
    for (uint32_t by = 0; by < g.height; ++by) {
        for (uint32_t bx = 0; bx < g.width; ++bx) {
            int64_t water = 0, valid = 0;
            for (uint32_t dy = 0; dy < factor; ++dy) {
                for (uint32_t dx = 0; dx < factor; ++dx) {
                    const uint64_t x = uint64_t(bx) * factor + dx;
                    const uint64_t y = uint64_t(by) * factor + dy;
                    if (x >= src.width() || y >= src.height()) continue;
                    const uint8_t v = src.at(uint32_t(x), uint32_t(y));
                    if (v == kMaskNoData) continue;
                    ++valid;
                    if (v == 1) ++water;
                }
            }
            if (valid == 0) continue;
            if (rule == ResampleRule::any_water)
                out.at(bx, by) = water > 0 ? 1 : 0;
            else
                out.at(bx, by) = (2 * water > valid) ? 1 : 0;
        }
    }
    return out;
}

}  // namespace aqua

#include <doctest.h>

#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "aqua/raster.hpp"

using namespace aqua;

namespace {

GridRef make_grid(uint32_t w, uint32_t h, double ps = 10.0) {
    GridRef g;
    g.origin_x = 500000.0;
    g.origin_y = 4200000.0;
    g.pixel_size_x = ps;
    g.pixel_size_y = ps;
    g.width = w;
    g.height = h;
    g.crs_tag = "UTM33N";
    return g;
}

}  // namespace

TEST_CASE("quantize_db frozen examples") {
    CHECK(quantize_db(1.0) == 255);
    CHECK(quantize_db(-49.0) == 5);
    CHECK(quantize_db(-120.0) == 5);
    CHECK(quantize_db(-20.0) == 150);
    CHECK(quantize_db(10.0) == 255);
}

TEST_CASE("dequantize frozen examples and round trip") {
    CHECK(dequantize_db(255) == doctest::Approx(1.0));
    CHECK(dequantize_db(5) == doctest::Approx(-49.0));
    CHECK(dequantize_db(150) == doctest::Approx(-20.0));
    for (int v = 5; v <= 255; ++v) CHECK(quantize_db(dequantize_db(uint8_t(v))) == v);
    CHECK_THROWS_AS(dequantize_db(0), std::invalid_argument);
}

TEST_CASE("quantize_db exhaustive sweep against the closed formula") {
    // 0.01 dB steps across and beyond the clamp range.
    uint8_t prev = 0;
    for (int i = -12000; i <= 1000; ++i) {
        const double x = double(i) / 100.0;
        const double clamped = std::max(-49.0, std::min(1.0, x));
        const auto expect = uint8_t(std::lround((clamped + 50.0) * 5.0));
        const uint8_t got = quantize_db(x);
        REQUIRE(got == expect);
        REQUIRE(got >= 5);
        // Monotone non-decreasing.
        REQUIRE(got >= prev);
        prev = got;
        // Round trip within half a step.
        if (x >= -49.0 && x <= 1.0) REQUIRE(std::fabs(dequantize_db(got) - x) <= 0.1 + 1e-12);
    }
    CHECK_THROWS_AS(quantize_db(std::nan("")), std::invalid_argument);
    CHECK_THROWS_AS(quantize_db(INFINITY), std::invalid_argument);
}

TEST_CASE("raster construction and nodata fill") {
    ByteRaster r(make_grid(4, 3), 2, kBackscatterNoData);
    CHECK(r.width() == 4);
    CHECK(r.height() == 3);
    CHECK(r.bands() == 2);
    CHECK(r.pixels() == 12);
    for (int b = 0; b < 2; ++b)
        for (uint32_t y = 0; y < 3; ++y)
            for (uint32_t x = 0; x < 4; ++x) CHECK(r.is_nodata(x, y, b));
    r.at(2, 1, 1) = 42;
    CHECK(r.at(2, 1, 1) == 42);
    CHECK_FALSE(r.is_nodata(2, 1, 1));
}

TEST_CASE("tile_origins worked examples") {
    CHECK(tile_origins(256, 256, 0) == std::vector<uint32_t>{0});
    CHECK(tile_origins(512, 320, 32) == std::vector<uint32_t>{0, 192});
    // A 4096 scene with a 128 border on each side; the final origin is pulled
    // back flush with the edge.
    CHECK(tile_origins(4352, 4224, 128) == std::vector<uint32_t>{0, 128});
}

TEST_CASE("tile_origins rejects bad geometry") {
    CHECK_THROWS_AS(tile_origins(100, 64, 32), std::invalid_argument);
    CHECK_THROWS_AS(tile_origins(100, 0, 0), std::invalid_argument);
    CHECK_THROWS_AS(tile_origins(63, 64, 0), std::invalid_argument);
}

TEST_CASE("tile_origins covers every pixel with stride spacing") {
    for (uint32_t dim : {64u, 65u, 100u, 128u, 200u, 512u}) {
        for (uint32_t tile : {32u, 64u}) {
            for (uint32_t overlap : {0u, 4u, 8u}) {
                if (dim < tile) continue;
                const std::vector<uint32_t> origins = tile_origins(dim, tile, overlap);
                std::vector<int> cover(dim, 0);
                for (uint32_t o : origins) {
                    REQUIRE(o + tile <= dim);
                    for (uint32_t i = 0; i < tile; ++i) ++cover[o + i];
                }
                for (uint32_t i = 0; i < dim; ++i) REQUIRE(cover[i] >= 1);
                // Origins advance by the stride until the clamped tail.
                const uint32_t stride = tile - 2 * overlap;
                for (size_t k = 0; k + 2 < origins.size(); ++k)
                    REQUIRE(origins[k + 1] - origins[k] == stride);
            }
        }
    }
}

TEST_CASE("retile reconstructs the source") {
    ByteRaster src(make_grid(100, 80), 1, kMaskNoData);
    for (uint32_t y = 0; y < 80; ++y)
        for (uint32_t x = 0; x < 100; ++x) src.at(x, y) = uint8_t((x * 7 + y * 13) % 251);
    const auto tiles = retile(src, 32, 4);
    ByteRaster rebuilt(make_grid(100, 80), 1, kMaskNoData);
    for (const auto& [tile, place] : tiles) {
        CHECK(tile.width() == 32);
        CHECK(tile.height() == 32);
        // Tile grids keep map coordinates aligned with the source.
        CHECK(tile.grid().origin_x ==
              doctest::Approx(src.grid().origin_x + place.col * 10.0));
        for (uint32_t y = 0; y < 32; ++y)
            for (uint32_t x = 0; x < 32; ++x) {
                const uint8_t v = tile.at(x, y);
                CHECK(v == src.at(place.col + x, place.row + y));
                rebuilt.at(place.col + x, place.row + y) = v;
            }
    }
    CHECK(rebuilt.values() == src.values());
}

TEST_CASE("crop window and grid shift") {
    ByteRaster src(make_grid(10, 10), 1, kMaskNoData);
    src.at(3, 2) = 9;
    const ByteRaster c = crop(src, 3, 2, 4, 5);
    CHECK(c.width() == 4);
    CHECK(c.height() == 5);
    CHECK(c.at(0, 0) == 9);
    CHECK(c.grid().origin_x == doctest::Approx(500000.0 + 30.0));
    CHECK(c.grid().origin_y == doctest::Approx(4200000.0 - 20.0));
    CHECK_THROWS_AS(crop(src, 8, 0, 4, 4), std::invalid_argument);
}

TEST_CASE("pad_to sizes, offsets and fill") {
    ByteRaster src(make_grid(40, 30), 2, kBackscatterNoData);
    for (uint32_t y = 0; y < 30; ++y)
        for (uint32_t x = 0; x < 40; ++x) {
            src.at(x, y, 0) = 10;
            src.at(x, y, 1) = 20;
        }
    const ByteRaster p = pad_to(src, 48, 32, 4, kBackscatterNoData);
    CHECK(p.width() == 56);
    CHECK(p.height() == 40);
    CHECK(p.grid().origin_x == doctest::Approx(500000.0 - 40.0));
    CHECK(p.grid().origin_y == doctest::Approx(4200000.0 + 40.0));
    int fill_count = 0;
    for (uint32_t y = 0; y < p.height(); ++y)
        for (uint32_t x = 0; x < p.width(); ++x) {
            const bool inside = x >= 4 && x < 44 && y >= 4 && y < 34;
            if (inside) {
                CHECK(p.at(x, y, 0) == 10);
                CHECK(p.at(x, y, 1) == 20);
            } else {
                CHECK(p.at(x, y, 0) == kBackscatterNoData);
                ++fill_count;
            }
        }
    CHECK(fill_count == int(56 * 40 - 40 * 30));
    // Content pixels keep their map coordinates.
    CHECK(p.grid().center_x(4) == doctest::Approx(src.grid().center_x(0)));
    CHECK(p.grid().center_y(4) == doctest::Approx(src.grid().center_y(0)));
}

TEST_CASE("pad_to paper-scale arithmetic") {
    ByteRaster src(make_grid(4000, 4090), 1, kBackscatterNoData);
    const ByteRaster p = pad_to(src, 4096, 4096, 128, kBackscatterNoData);
    CHECK(p.width() == 4352);
    CHECK(p.height() == 4352);
}

TEST_CASE("pad_to identity and error") {
    ByteRaster src(make_grid(8, 8), 1, kMaskNoData);
    src.at(5, 5) = 1;
    const ByteRaster same = pad_to(src, 8, 8, 0, kMaskNoData);
    CHECK(same.values() == src.values());
    CHECK(same.grid() == src.grid());
    CHECK_THROWS_AS(pad_to(src, 7, 8, 0, kMaskNoData), std::invalid_argument);
}

TEST_CASE("resample_mask rules on a 3x3 block") {
    MaskRaster m(make_grid(3, 3), 1, kMaskNoData);
    for (uint32_t y = 0; y < 3; ++y)
        for (uint32_t x = 0; x < 3; ++x) m.at(x, y) = 0;
    m.at(1, 1) = 1;
    CHECK(resample_mask(m, 3, ResampleRule::any_water).at(0, 0) == 1);
    CHECK(resample_mask(m, 3, ResampleRule::majority).at(0, 0) == 0);

    // Majority needs strictly more than half of the valid pixels.
    MaskRaster half(make_grid(2, 2), 1, kMaskNoData);
    half.at(0, 0) = 1;
    half.at(1, 0) = 1;
    half.at(0, 1) = 0;
    half.at(1, 1) = 0;
    CHECK(resample_mask(half, 2, ResampleRule::majority).at(0, 0) == 0);
    half.at(0, 1) = 1;
    CHECK(resample_mask(half, 2, ResampleRule::majority).at(0, 0) == 1);
}

TEST_CASE("resample_mask nodata handling") {
    MaskRaster m(make_grid(4, 2), 1, kMaskNoData);
    // Left block all nodata; right block one water, one land, two nodata.
    m.at(2, 0) = 1;
    m.at(3, 0) = 0;
    const MaskRaster any = resample_mask(m, 2, ResampleRule::any_water);
    CHECK(any.at(0, 0) == kMaskNoData);
    CHECK(any.at(1, 0) == 1);
    // One water of two valid pixels is not a strict majority.
    const MaskRaster maj = resample_mask(m, 2, ResampleRule::majority);
    CHECK(maj.at(1, 0) == 0);
}

TEST_CASE("resample_mask factor 1 is the identity") {
    MaskRaster m(make_grid(5, 4), 1, kMaskNoData);
    m.at(0, 0) = 1;
    m.at(4, 3) = 0;
    m.at(2, 2) = 1;
    for (ResampleRule rule : {ResampleRule::any_water, ResampleRule::majority}) {
        const MaskRaster r = resample_mask(m, 1, rule);
        CHECK(r.values() == m.values());
        CHECK(r.grid() == m.grid());
    }
}

TEST_CASE("resample_mask ragged edge keeps partial blocks") {
    MaskRaster m(make_grid(5, 5), 1, kMaskNoData);
    for (uint32_t y = 0; y < 5; ++y)
        for (uint32_t x = 0; x < 5; ++x) m.at(x, y) = 1;
    const MaskRaster r = resample_mask(m, 3, ResampleRule::majority);
    CHECK(r.width() == 2);
    CHECK(r.height() == 2);
    CHECK(r.at(1, 1) == 1);
    CHECK(r.grid().pixel_size_x == doctest::Approx(30.0));
}

#include <doctest.h>

#include <cmath>
#include <queue>
#include <stdexcept>
#include <vector>

#include "aqua/rng.hpp"
#include "aqua/shade.hpp"

using namespace aqua;

namespace {

GridRef make_grid(uint32_t w, uint32_t h, double ps = 90.0) {
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

// Brute-force Horn slope written independently of the library routine:
// gather the full 3x3 neighborhood with clamped indices, then apply the
// (1,2,1) weighted differences.
FloatRaster horn_oracle(const DemRaster& dem) {
    const uint32_t w = dem.width(), h = dem.height();
    const double cell = dem.grid().pixel_size_x;
    FloatRaster out(dem.grid(), 1, kElevationNoData);
    for (uint32_t y = 0; y < h; ++y) {
        for (uint32_t x = 0; x < w; ++x) {
            if (dem.is_nodata(x, y)) continue;
            double z[3][3];
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    int32_t cx = int32_t(x) + dx, cy = int32_t(y) + dy;
                    cx = std::max(0, std::min<int32_t>(cx, int32_t(w) - 1));
                    cy = std::max(0, std::min<int32_t>(cy, int32_t(h) - 1));
                    z[dy + 1][dx + 1] = dem.is_nodata(uint32_t(cx), uint32_t(cy))
                                            ? double(dem.at(x, y))
                                            : double(dem.at(uint32_t(cx), uint32_t(cy)));
                }
            const double dzdx = ((z[0][2] + 2.0 * z[1][2] + z[2][2]) -
                                 (z[0][0] + 2.0 * z[1][0] + z[2][0])) /
                                (8.0 * cell);
            const double dzdy = ((z[2][0] + 2.0 * z[2][1] + z[2][2]) -
                                 (z[0][0] + 2.0 * z[0][1] + z[0][2])) /
                                (8.0 * cell);
            out.at(x, y) = float(std::atan(std::sqrt(dzdx * dzdx + dzdy * dzdy)) * 180.0 /
                                 3.14159265358979323846);
        }
    }
    return out;
}

// Border flood fill over the background; anything unreached becomes mask.
ShadeMask fill_oracle(const ShadeMask& m) {
    const uint32_t w = m.width(), h = m.height();
    std::vector<uint8_t> outside(size_t(w) * h, 0);
    std::queue<std::pair<uint32_t, uint32_t>> q;
    auto push = [&](uint32_t x, uint32_t y) {
        if (m.at(x, y) == 0 && !outside[size_t(y) * w + x]) {
            outside[size_t(y) * w + x] = 1;
            q.push({x, y});
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
    while (!q.empty()) {
        auto [x, y] = q.front();
        q.pop();
        if (x > 0) push(x - 1, y);
        if (x + 1 < w) push(x + 1, y);
        if (y > 0) push(x, y - 1);
        if (y + 1 < h) push(x, y + 1);
    }
    ShadeMask out = m;
    for (uint32_t y = 0; y < h; ++y)
        for (uint32_t x = 0; x < w; ++x)
            if (m.at(x, y) == 0 && !outside[size_t(y) * w + x]) out.at(x, y) = 1;
    return out;
}

ShadeMask random_mask(uint32_t w, uint32_t h, double p, Rng& rng) {
    ShadeMask m(make_grid(w, h), 1, kMaskNoData);
    for (uint32_t y = 0; y < h; ++y)
        for (uint32_t x = 0; x < w; ++x) m.at(x, y) = rng.uniform() < p ? 1 : 0;
    return m;
}

}  // namespace

TEST_CASE("aggregate_min block minimum and partial edges") {
    DemRaster dem(make_grid(5, 5, 30.0), 1, kElevationNoData);
    for (uint32_t y = 0; y < 5; ++y)
        for (uint32_t x = 0; x < 5; ++x) dem.at(x, y) = float(10 + y * 5 + x);
    dem.at(1, 1) = 9.0f;
    const DemRaster agg = aggregate_min(dem, 3);
    CHECK(agg.width() == 2);
    CHECK(agg.height() == 2);
    CHECK(agg.grid().pixel_size_x == doctest::Approx(90.0));
    CHECK(agg.at(0, 0) == doctest::Approx(9.0));
    CHECK(agg.at(1, 0) == doctest::Approx(13.0));
    CHECK(agg.at(0, 1) == doctest::Approx(25.0));
    CHECK(agg.at(1, 1) == doctest::Approx(28.0));
}

TEST_CASE("aggregate_min nodata blocks and factor 1") {
    DemRaster dem(make_grid(4, 2, 30.0), 1, kElevationNoData);
    dem.at(2, 0) = 100.0f;
    const DemRaster agg = aggregate_min(dem, 2);
    CHECK(agg.is_nodata(0, 0));
    CHECK(agg.at(1, 0) == doctest::Approx(100.0));

    DemRaster d2(make_grid(3, 3, 30.0), 1, kElevationNoData);
    for (uint32_t y = 0; y < 3; ++y)
        for (uint32_t x = 0; x < 3; ++x) d2.at(x, y) = float(x + y);
    const DemRaster same = aggregate_min(d2, 1);
    CHECK(same.values() == d2.values());
    CHECK(same.grid() == d2.grid());
}

TEST_CASE("slope on a flat plane is zero") {
    DemRaster dem(make_grid(6, 6), 1, kElevationNoData);
    for (uint32_t y = 0; y < 6; ++y)
        for (uint32_t x = 0; x < 6; ++x) dem.at(x, y) = 250.0f;
    const FloatRaster s = slope_degrees(dem);
    for (uint32_t y = 0; y < 6; ++y)
        for (uint32_t x = 0; x < 6; ++x) CHECK(s.at(x, y) == doctest::Approx(0.0));
}

TEST_CASE("unit incline gives 45 degrees in the interior") {
    const double cell = 90.0;
    DemRaster dem(make_grid(8, 8, cell), 1, kElevationNoData);
    for (uint32_t y = 0; y < 8; ++y)
        for (uint32_t x = 0; x < 8; ++x) dem.at(x, y) = float(double(x) * cell);
    const FloatRaster s = slope_degrees(dem);
    for (uint32_t y = 1; y < 7; ++y)
        for (uint32_t x = 1; x < 7; ++x) CHECK(s.at(x, y) == doctest::Approx(45.0).epsilon(1e-6));
}

TEST_CASE("slope invariant under constant elevation shift") {
    Rng rng(17);
    DemRaster dem(make_grid(7, 7), 1, kElevationNoData);
    for (uint32_t y = 0; y < 7; ++y)
        for (uint32_t x = 0; x < 7; ++x) dem.at(x, y) = float(rng.uniform(100.0, 400.0));
    DemRaster lifted = dem;
    for (float& v : lifted.values()) v += 500.0f;
    const FloatRaster a = slope_degrees(dem);
    const FloatRaster b = slope_degrees(lifted);
    for (uint32_t y = 0; y < 7; ++y)
        for (uint32_t x = 0; x < 7; ++x)
            CHECK(a.at(x, y) == doctest::Approx(b.at(x, y)).epsilon(1e-4));
}

TEST_CASE("slope matches the brute-force oracle on random DEMs") {
    Rng rng(99);
    for (int rep = 0; rep < 100; ++rep) {
        DemRaster dem(make_grid(16, 16), 1, kElevationNoData);
        for (uint32_t y = 0; y < 16; ++y)
            for (uint32_t x = 0; x < 16; ++x) dem.at(x, y) = float(rng.uniform(0.0, 1000.0));
        if (rep % 3 == 0) dem.at(uint32_t(rng.below(16)), uint32_t(rng.below(16))) =
            kElevationNoData;
        const FloatRaster got = slope_degrees(dem);
        const FloatRaster want = horn_oracle(dem);
        for (uint32_t y = 0; y < 16; ++y)
            for (uint32_t x = 0; x < 16; ++x) {
                if (dem.is_nodata(x, y)) {
                    REQUIRE(got.is_nodata(x, y));
                } else {
                    REQUIRE(got.at(x, y) ==
                            doctest::Approx(want.at(x, y)).epsilon(1e-9).scale(1.0));
                }
            }
    }
}

TEST_CASE("slope rejects bad grids") {
    DemRaster tiny(make_grid(2, 2), 1, kElevationNoData);
    CHECK_THROWS_AS(slope_degrees(tiny), std::invalid_argument);
    GridRef g = make_grid(4, 4);
    g.pixel_size_y = 30.0;
    DemRaster skewed(g, 1, kElevationNoData);
    CHECK_THROWS_AS(slope_degrees(skewed), std::invalid_argument);
}

TEST_CASE("threshold_slope is strictly greater-than") {
    FloatRaster s(make_grid(3, 1), 1, kElevationNoData);
    s.at(0, 0) = 20.0f;
    s.at(1, 0) = 20.01f;
    s.at(2, 0) = kElevationNoData;
    const ShadeMask m = threshold_slope(s, 20.0);
    CHECK(m.at(0, 0) == 0);
    CHECK(m.at(1, 0) == 1);
    CHECK(m.at(2, 0) == 0);
}

TEST_CASE("fill_holes closes a ring") {
    ShadeMask m(make_grid(5, 5), 1, kMaskNoData);
    for (uint32_t y = 0; y < 5; ++y)
        for (uint32_t x = 0; x < 5; ++x) m.at(x, y) = 0;
    for (uint32_t i = 1; i <= 3; ++i) {
        m.at(i, 1) = m.at(i, 3) = 1;
        m.at(1, i) = m.at(3, i) = 1;
    }
    const ShadeMask f = fill_holes(m);
    CHECK(f.at(2, 2) == 1);
    // Border-touching background stays open.
    CHECK(f.at(0, 0) == 0);
    CHECK(f.at(4, 4) == 0);
}

TEST_CASE("fill_holes equals the flood-fill oracle on random masks") {
    Rng rng(4);
    for (int rep = 0; rep < 50; ++rep) {
        const ShadeMask m = random_mask(12, 12, 0.45, rng);
        const ShadeMask got = fill_holes(m);
        const ShadeMask want = fill_oracle(m);
        REQUIRE(got.values() == want.values());
        // Idempotent.
        REQUIRE(fill_holes(got).values() == got.values());
    }
}

TEST_CASE("convex hull fills an L-shaped component") {
    ShadeMask m(make_grid(8, 8), 1, kMaskNoData);
    for (uint32_t y = 0; y < 8; ++y)
        for (uint32_t x = 0; x < 8; ++x) m.at(x, y) = 0;
    for (uint32_t i = 0; i < 5; ++i) {
        m.at(0, i) = 1;
        m.at(i, 4) = 1;
    }
    const ShadeMask h = convex_hull_components(m);
    // The concavity diagonal is inside the hull.
    CHECK(h.at(1, 2) == 1);
    CHECK(h.at(2, 3) == 1);
    // Far corner stays out.
    CHECK(h.at(7, 0) == 0);
    // Superset of the input.
    for (uint32_t y = 0; y < 8; ++y)
        for (uint32_t x = 0; x < 8; ++x)
            if (m.at(x, y) == 1) CHECK(h.at(x, y) == 1);
}

TEST_CASE("convex hull leaves single pixels and separated pairs alone") {
    ShadeMask m(make_grid(9, 9), 1, kMaskNoData);
    for (uint32_t y = 0; y < 9; ++y)
        for (uint32_t x = 0; x < 9; ++x) m.at(x, y) = 0;
    m.at(1, 1) = 1;
    m.at(7, 7) = 1;
    const ShadeMask h = convex_hull_components(m);
    CHECK(h.values() == m.values());
}

TEST_CASE("convex hull is idempotent on random masks") {
    Rng rng(21);
    for (int rep = 0; rep < 30; ++rep) {
        const ShadeMask m = random_mask(14, 14, 0.25, rng);
        const ShadeMask once = convex_hull_components(m);
        const ShadeMask twice = convex_hull_components(once);
        REQUIRE(twice.values() == once.values());
        for (size_t i = 0; i < m.values().size(); ++i)
            if (m.values()[i] == 1) REQUIRE(once.values()[i] == 1);
    }
}

TEST_CASE("project_mask upsamples a single pixel to a 9x9 block") {
    ShadeMask coarse(make_grid(3, 3, 90.0), 1, kMaskNoData);
    for (uint32_t y = 0; y < 3; ++y)
        for (uint32_t x = 0; x < 3; ++x) coarse.at(x, y) = 0;
    coarse.at(1, 1) = 1;
    GridRef fine = make_grid(27, 27, 10.0);
    const ShadeMask out = project_mask(coarse, fine);
    int ones = 0;
    for (uint32_t y = 0; y < 27; ++y)
        for (uint32_t x = 0; x < 27; ++x) {
            const bool inside = x >= 9 && x < 18 && y >= 9 && y < 18;
            CHECK(out.at(x, y) == (inside ? 1 : 0));
            ones += out.at(x, y);
        }
    CHECK(ones == 81);
}

TEST_CASE("project_mask identity and out-of-extent zeros") {
    ShadeMask m(make_grid(4, 4, 90.0), 1, kMaskNoData);
    for (uint32_t y = 0; y < 4; ++y)
        for (uint32_t x = 0; x < 4; ++x) m.at(x, y) = uint8_t((x + y) % 2);
    const ShadeMask same = project_mask(m, m.grid());
    CHECK(same.values() == m.values());

    GridRef bigger = make_grid(8, 8, 90.0);
    bigger.origin_x -= 2 * 90.0;
    bigger.origin_y += 2 * 90.0;
    const ShadeMask wide = project_mask(m, bigger);
    CHECK(wide.at(0, 0) == 0);
    CHECK(wide.at(2, 2) == m.at(0, 0));

    GridRef other = m.grid();
    other.crs_tag = "UTM34N";
    CHECK_THROWS_AS(project_mask(m, other), std::invalid_argument);
}

TEST_CASE("apply_override clears kept pixels") {
    ShadeMask m(make_grid(3, 3), 1, kMaskNoData);
    ShadeMask keep(make_grid(3, 3), 1, kMaskNoData);
    for (uint32_t y = 0; y < 3; ++y)
        for (uint32_t x = 0; x < 3; ++x) {
            m.at(x, y) = 1;
            keep.at(x, y) = 0;
        }
    keep.at(1, 1) = 1;
    const ShadeMask out = apply_override(m, keep);
    CHECK(out.at(1, 1) == 0);
    CHECK(out.at(0, 0) == 1);
}

TEST_CASE("build_shade_mask output is a superset of the thresholded slope") {
    Rng rng(31);
    DemRaster dem(make_grid(18, 18, 30.0), 1, kElevationNoData);
    for (uint32_t y = 0; y < 18; ++y)
        for (uint32_t x = 0; x < 18; ++x)
            dem.at(x, y) = float(40.0 * std::sin(x * 0.8) * std::cos(y * 0.6) +
                                 rng.uniform(0.0, 8.0));
    ShadeParams params;
    const GridRef target = make_grid(18, 18, 30.0);
    const ShadeMask full = build_shade_mask(dem, params, target);

    const DemRaster agg = aggregate_min(dem, params.aggregate_factor);
    const ShadeMask base = threshold_slope(slope_degrees(agg), params.slope_threshold_deg);
    const ShadeMask projected = project_mask(base, target);
    for (size_t i = 0; i < full.values().size(); ++i)
        if (projected.values()[i] == 1) REQUIRE(full.values()[i] == 1);
}

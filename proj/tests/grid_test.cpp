#include <doctest.h>

#include <stdexcept>

#include "aqua/grid.hpp"

using aqua::GridRef;

namespace {

GridRef make_grid(double ox, double oy, double ps, uint32_t w, uint32_t h) {
    GridRef g;
    g.origin_x = ox;
    g.origin_y = oy;
    g.pixel_size_x = ps;
    g.pixel_size_y = ps;
    g.width = w;
    g.height = h;
    g.crs_tag = "UTM33N";
    return g;
}

}  // namespace

TEST_CASE("validate rejects degenerate grids") {
    CHECK_NOTHROW(aqua::validate(make_grid(0, 0, 10, 4, 4)));
    CHECK_THROWS_AS(aqua::validate(make_grid(0, 0, 10, 0, 4)), std::invalid_argument);
    CHECK_THROWS_AS(aqua::validate(make_grid(0, 0, 10, 4, 0)), std::invalid_argument);
    GridRef g = make_grid(0, 0, 0, 4, 4);
    CHECK_THROWS_AS(aqua::validate(g), std::invalid_argument);
    g = make_grid(0, 0, -10, 4, 4);
    CHECK_THROWS_AS(aqua::validate(g), std::invalid_argument);
}

TEST_CASE("pixel centers") {
    const GridRef g = make_grid(1000, 2000, 10, 8, 8);
    CHECK(g.center_x(0) == doctest::Approx(1005.0));
    CHECK(g.center_y(0) == doctest::Approx(1995.0));
    CHECK(g.center_x(3) == doctest::Approx(1035.0));
    CHECK(g.center_y(3) == doctest::Approx(1965.0));
}

TEST_CASE("composable requires shared crs, pixel size and integral offset") {
    const GridRef a = make_grid(1000, 2000, 10, 8, 8);

    GridRef b = make_grid(1050, 1970, 10, 4, 4);
    CHECK(aqua::composable(a, b));

    b = make_grid(1055, 1970, 10, 4, 4);
    CHECK_FALSE(aqua::composable(a, b));

    b = make_grid(1050, 1970, 30, 4, 4);
    CHECK_FALSE(aqua::composable(a, b));

    b = make_grid(1050, 1970, 10, 4, 4);
    b.crs_tag = "UTM34N";
    CHECK_FALSE(aqua::composable(a, b));
}

TEST_CASE("offset_between reports b inside a") {
    const GridRef a = make_grid(1000, 2000, 10, 8, 8);
    const GridRef b = make_grid(1050, 1970, 10, 4, 4);
    const aqua::PixelOffset off = aqua::offset_between(a, b);
    CHECK(off.col == 5);
    CHECK(off.row == 3);
}

TEST_CASE("offset_between can be negative") {
    const GridRef a = make_grid(1000, 2000, 10, 8, 8);
    const GridRef b = make_grid(950, 2020, 10, 4, 4);
    const aqua::PixelOffset off = aqua::offset_between(a, b);
    CHECK(off.col == -5);
    CHECK(off.row == -2);
}

TEST_CASE("grid_union covers both inputs exactly") {
    const GridRef a = make_grid(1000, 2000, 10, 8, 8);
    const GridRef b = make_grid(1050, 1970, 10, 10, 4);
    const GridRef u = aqua::grid_union(a, b);
    CHECK(u.origin_x == doctest::Approx(1000.0));
    CHECK(u.origin_y == doctest::Approx(2000.0));
    // b extends to x = 1150, a to 1080; b's rows end at y = 1930, a's at 1920.
    CHECK(u.width == 15);
    CHECK(u.height == 8);

    const GridRef same = aqua::grid_union(a, a);
    CHECK(same == a);
}

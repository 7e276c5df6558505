#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "aqua/raster_io.hpp"
#include "aqua/rng.hpp"

using namespace aqua;

namespace {

std::string temp_path(const char* name) {
    static int counter = 0;
    return (std::filesystem::temp_directory_path() /
            (std::string("aqua_io_") + name + "_" + std::to_string(counter++) + ".aqmr"))
        .string();
}

GridRef make_grid(uint32_t w, uint32_t h) {
    GridRef g;
    g.origin_x = 500000.0;
    g.origin_y = 4200000.0;
    g.pixel_size_x = 10.0;
    g.pixel_size_y = 10.0;
    g.width = w;
    g.height = h;
    g.crs_tag = "UTM33N";
    return g;
}

std::vector<uint8_t> slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(bool(in));
    return std::vector<uint8_t>(std::istreambuf_iterator<char>(in),
                                std::istreambuf_iterator<char>());
}

void dump(const std::string& path, const std::vector<uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    REQUIRE(bool(out));
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
}

RasterIoCode read_code(const std::string& path, bool as_float = false) {
    try {
        if (as_float)
            (void)read_raster_f32(path);
        else
            (void)read_raster_u8(path);
    } catch (const RasterIoError& e) {
        return e.code();
    }
    FAIL("expected a RasterIoError");
    return RasterIoCode::io_failure;
}

}  // namespace

TEST_CASE("byte raster round trip preserves everything") {
    ByteRaster r(make_grid(7, 5), 2, kBackscatterNoData);
    Rng rng(1);
    for (int b = 0; b < 2; ++b)
        for (uint32_t y = 0; y < 5; ++y)
            for (uint32_t x = 0; x < 7; ++x) r.at(x, y, b) = uint8_t(rng.below(256));
    const std::string path = temp_path("u8");
    write_raster(r, path);
    const ByteRaster back = read_raster_u8(path);
    CHECK(back.grid() == r.grid());
    CHECK(back.bands() == 2);
    CHECK(back.nodata() == kBackscatterNoData);
    CHECK(back.values() == r.values());
    std::remove(path.c_str());
}

TEST_CASE("float raster round trip preserves bits") {
    FloatRaster r(make_grid(4, 6), 1, kElevationNoData);
    Rng rng(2);
    for (uint32_t y = 0; y < 6; ++y)
        for (uint32_t x = 0; x < 4; ++x) r.at(x, y) = float(rng.uniform(-5000.0, 5000.0));
    r.at(0, 0) = kElevationNoData;
    const std::string path = temp_path("f32");
    write_raster(r, path);
    const FloatRaster back = read_raster_f32(path);
    CHECK(back.grid() == r.grid());
    CHECK(back.values() == r.values());
    CHECK(back.nodata() == kElevationNoData);
    std::remove(path.c_str());
}

TEST_CASE("reserialization is byte identical") {
    ByteRaster r(make_grid(16, 9), 1, kMaskNoData);
    Rng rng(3);
    for (uint32_t y = 0; y < 9; ++y)
        for (uint32_t x = 0; x < 16; ++x) r.at(x, y) = uint8_t(rng.below(3));
    const std::string p1 = temp_path("ser1");
    const std::string p2 = temp_path("ser2");
    write_raster(r, p1);
    write_raster(read_raster_u8(p1), p2);
    CHECK(slurp(p1) == slurp(p2));
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}

TEST_CASE("golden header layout") {
    // 1x1 single-band byte raster, fully pinned encoding.
    GridRef g;
    g.origin_x = 1.0;
    g.origin_y = 2.0;
    g.pixel_size_x = 3.0;
    g.pixel_size_y = 4.0;
    g.width = 1;
    g.height = 1;
    g.crs_tag = "X";
    ByteRaster r(g, 1, 0);
    r.at(0, 0) = 7;
    const std::string path = temp_path("golden");
    write_raster(r, path);
    const std::vector<uint8_t> bytes = slurp(path);
    // magic, version, dtype, bands.
    const std::vector<uint8_t> head = {'A', 'Q', 'M', 'R', 1, 0, 1, 1};
    REQUIRE(bytes.size() == 4 + 2 + 1 + 1 + 4 + 4 + 5 * 8 + 2 + 1 + 1 + 4);
    CHECK(std::vector<uint8_t>(bytes.begin(), bytes.begin() + 8) == head);
    // width=1, height=1 little endian.
    CHECK(bytes[8] == 1);
    CHECK(bytes[12] == 1);
    // nodata 0.0, origin_x 1.0 as little-endian doubles.
    CHECK(bytes[16 + 7] == 0x00);
    CHECK(bytes[24 + 6] == 0xf0);
    CHECK(bytes[24 + 7] == 0x3f);
    // crs tag.
    CHECK(bytes[56] == 1);
    CHECK(bytes[57] == 0);
    CHECK(bytes[58] == 'X');
    // payload byte then crc32 of {7}.
    CHECK(bytes[59] == 7);
    // crc32 of the single byte 0x07 is 0x4c667a2e (zlib polynomial).
    CHECK(bytes[60] == 0x2e);
    CHECK(bytes[61] == 0x7a);
    CHECK(bytes[62] == 0x66);
    CHECK(bytes[63] == 0x4c);
    std::remove(path.c_str());
}

TEST_CASE("read_raster_info skips the payload") {
    FloatRaster r(make_grid(11, 13), 3, -1.0f);
    const std::string path = temp_path("info");
    write_raster(r, path);
    const RasterInfo info = read_raster_info(path);
    CHECK(info.dtype == 2);
    CHECK(info.bands == 3);
    CHECK(info.grid == r.grid());
    CHECK(info.nodata == doctest::Approx(-1.0));
    std::remove(path.c_str());
}

TEST_CASE("missing file reports io_failure") {
    CHECK(read_code("/nonexistent/dir/file.aqmr") == RasterIoCode::io_failure);
}

TEST_CASE("magic mismatch") {
    const std::string path = temp_path("magic");
    ByteRaster r(make_grid(2, 2), 1, 0);
    write_raster(r, path);
    std::vector<uint8_t> bytes = slurp(path);
    bytes[0] = 'Z';
    dump(path, bytes);
    CHECK(read_code(path) == RasterIoCode::magic_mismatch);
    std::remove(path.c_str());
}

TEST_CASE("unsupported version") {
    const std::string path = temp_path("ver");
    ByteRaster r(make_grid(2, 2), 1, 0);
    write_raster(r, path);
    std::vector<uint8_t> bytes = slurp(path);
    bytes[4] = 9;
    dump(path, bytes);
    CHECK(read_code(path) == RasterIoCode::unsupported_version);
    std::remove(path.c_str());
}

TEST_CASE("unsupported dtype byte") {
    const std::string path = temp_path("dtype");
    ByteRaster r(make_grid(2, 2), 1, 0);
    write_raster(r, path);
    std::vector<uint8_t> bytes = slurp(path);
    bytes[6] = 3;
    dump(path, bytes);
    CHECK(read_code(path) == RasterIoCode::unsupported_dtype);
    std::remove(path.c_str());
}

TEST_CASE("dtype mismatch between file and reader") {
    const std::string path = temp_path("dtmis");
    ByteRaster r(make_grid(2, 2), 1, 0);
    write_raster(r, path);
    CHECK(read_code(path, /*as_float=*/true) == RasterIoCode::dtype_mismatch);
    std::remove(path.c_str());
}

TEST_CASE("truncated payload") {
    const std::string path = temp_path("trunc");
    ByteRaster r(make_grid(8, 8), 1, 0);
    write_raster(r, path);
    std::vector<uint8_t> bytes = slurp(path);
    bytes.resize(bytes.size() - 10);
    dump(path, bytes);
    CHECK(read_code(path) == RasterIoCode::truncated_payload);
    std::remove(path.c_str());
}

TEST_CASE("single bit flip in the payload fails the checksum") {
    const std::string path = temp_path("crc");
    ByteRaster r(make_grid(8, 8), 1, 0);
    for (uint32_t y = 0; y < 8; ++y)
        for (uint32_t x = 0; x < 8; ++x) r.at(x, y) = uint8_t(x + y);
    write_raster(r, path);
    std::vector<uint8_t> bytes = slurp(path);
    bytes[bytes.size() - 4 - 17] ^= 0x10;
    dump(path, bytes);
    CHECK(read_code(path) == RasterIoCode::checksum_mismatch);
    std::remove(path.c_str());
}

TEST_CASE("truncated header") {
    const std::string path = temp_path("thead");
    ByteRaster r(make_grid(2, 2), 1, 0);
    write_raster(r, path);
    std::vector<uint8_t> bytes = slurp(path);
    bytes.resize(20);
    dump(path, bytes);
    CHECK(read_code(path) == RasterIoCode::bad_header);
    std::remove(path.c_str());
}

TEST_CASE("zero dimension header is rejected") {
    const std::string path = temp_path("zdim");
    ByteRaster r(make_grid(2, 2), 1, 0);
    write_raster(r, path);
    std::vector<uint8_t> bytes = slurp(path);
    bytes[8] = 0;  // width -> 0
    dump(path, bytes);
    CHECK(read_code(path) == RasterIoCode::bad_header);
    std::remove(path.c_str());
}

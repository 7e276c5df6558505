#pragma once

#include <string>

#include "aqua/raster.hpp"

namespace aqua {

enum class RasterIoCode {
    io_failure,
    magic_mismatch,
    unsupported_version,
    unsupported_dtype,
    bad_header,
    dtype_mismatch,
    truncated_payload,
    checksum_mismatch,
};

const char* to_string(RasterIoCode code);

class RasterIoError : public std::runtime_error {
public:
    RasterIoError(RasterIoCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
    RasterIoCode code() const { return code_; }

private:
    RasterIoCode code_;
};

// Summary read from a file without touching the payload.
struct RasterInfo {
    uint8_t dtype = 0;  // 1 = uint8, 2 = float32
    uint8_t bands = 0;
    GridRef grid;
    double nodata = 0.0;
};

RasterInfo read_raster_info(const std::string& path);

void write_raster(const ByteRaster& r, const std::string& path);
void write_raster(const FloatRaster& r, const std::string& path);

ByteRaster read_raster_u8(const std::string& path);
FloatRaster read_raster_f32(const std::string& path);

}  // namespace aqua

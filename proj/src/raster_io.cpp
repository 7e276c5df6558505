#include "aqua/raster_io.hpp"

#include <zlib.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

// Raster container format, little-endian throughout:
//   "AQMR" | version u16 | dtype u8 | band_count u8 | width u32 | height u32 |
//   nodata f64 | origin_x f64 | origin_y f64 | pixel_size_x f64 |
//   pixel_size_y f64 | crs_tag_len u16 | crs_tag bytes |
//   payload (band-sequential, row-major) | crc32(payload) u32
// dtype 1 = uint8, 2 = float32 (IEEE-754 bits).

namespace aqua {

namespace {

constexpr char kMagic[4] = {'A', 'Q', 'M', 'R'};
constexpr uint16_t kVersion = 1;

// Explicit little-endian encoding, independent of host byte order.
void put_u16(std::vector<uint8_t>& b, uint16_t v) {
    b.push_back(uint8_t(v & 0xff));
    b.push_back(uint8_t(v >> 8));
}

void put_u32(std::vector<uint8_t>& b, uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(uint8_t((v >> (8 * i)) & 0xff));
}

void put_u64(std::vector<uint8_t>& b, uint64_t v) {
    for (int i = 0; i < 8; ++i) b.push_back(uint8_t((v >> (8 * i)) & 0xff));
}

void put_f64(std::vector<uint8_t>& b, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(b, bits);
}

class Reader {
public:
    Reader(const uint8_t* data, size_t size) : data_(data), size_(size) {}

    size_t remaining() const { return size_ - pos_; }
    const uint8_t* cursor() const { return data_ + pos_; }
    void skip(size_t n) { pos_ += n; }

    void need(size_t n, RasterIoCode code, const char* what) const {
        if (remaining() < n) throw RasterIoError(code, what);
    }

    uint8_t u8(RasterIoCode code, const char* what) {
        need(1, code, what);
        return data_[pos_++];
    }

    uint16_t u16(RasterIoCode code, const char* what) {
        need(2, code, what);
        uint16_t v = uint16_t(data_[pos_]) | uint16_t(data_[pos_ + 1]) << 8;
        pos_ += 2;
        return v;
    }

    uint32_t u32(RasterIoCode code, const char* what) {
        need(4, code, what);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= uint32_t(data_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }

    double f64(RasterIoCode code, const char* what) {
        need(8, code, what);
        uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= uint64_t(data_[pos_ + i]) << (8 * i);
        pos_ += 8;
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }

private:
    const uint8_t* data_;
    size_t size_;
    size_t pos_ = 0;
};

std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RasterIoError(RasterIoCode::io_failure, "cannot open " + path);
    in.seekg(0, std::ios::end);
    const auto size = in.tellg();
    in.seekg(0, std::ios::beg);
    std::vector<uint8_t> bytes(static_cast<size_t>(size));
    if (size > 0) in.read(reinterpret_cast<char*>(bytes.data()), size);
    if (!in) throw RasterIoError(RasterIoCode::io_failure, "cannot read " + path);
    return bytes;
}

void write_file(const std::string& path, const std::vector<uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw RasterIoError(RasterIoCode::io_failure, "cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    out.flush();
    if (!out) throw RasterIoError(RasterIoCode::io_failure, "cannot write " + path);
}

uint32_t payload_crc(const uint8_t* data, size_t size) {
    uint32_t crc = uint32_t(crc32(0L, Z_NULL, 0));
    // zlib takes uInt chunks; split so huge payloads stay correct.
    while (size > 0) {
        const size_t chunk = std::min<size_t>(size, 1u << 30);
        crc = uint32_t(crc32(crc, data, uInt(chunk)));
        data += chunk;
        size -= chunk;
    }
    return crc;
}

template <typename T>
void encode_payload(std::vector<uint8_t>& out, const std::vector<T>& values);

template <>
void encode_payload(std::vector<uint8_t>& out, const std::vector<uint8_t>& values) {
    out.insert(out.end(), values.begin(), values.end());
}

template <>
void encode_payload(std::vector<uint8_t>& out, const std::vector<float>& values) {
    out.reserve(out.size() + values.size() * 4);
    for (float v : values) {
        uint32_t bits;
        std::memcpy(&bits, &v, 4);
        put_u32(out, bits);
    }
}

template <typename T>
void write_raster_impl(const Raster<T>& r, uint8_t dtype, const std::string& path) {
    if (r.grid().crs_tag.size() > 0xffff)
        throw RasterIoError(RasterIoCode::bad_header, "crs tag longer than 65535 bytes");
    std::vector<uint8_t> bytes;
    bytes.insert(bytes.end(), kMagic, kMagic + 4);
    put_u16(bytes, kVersion);
    bytes.push_back(dtype);
    bytes.push_back(uint8_t(r.bands()));
    put_u32(bytes, r.width());
    put_u32(bytes, r.height());
    put_f64(bytes, double(r.nodata()));
    put_f64(bytes, r.grid().origin_x);
    put_f64(bytes, r.grid().origin_y);
    put_f64(bytes, r.grid().pixel_size_x);
    put_f64(bytes, r.grid().pixel_size_y);
    put_u16(bytes, uint16_t(r.grid().crs_tag.size()));
    bytes.insert(bytes.end(), r.grid().crs_tag.begin(), r.grid().crs_tag.end());
    const size_t payload_start = bytes.size();
    encode_payload(bytes, r.values());
    const uint32_t crc = payload_crc(bytes.data() + payload_start, bytes.size() - payload_start);
    put_u32(bytes, crc);
    write_file(path, bytes);
}

// Parses everything up to the start of the payload.
RasterInfo parse_header(Reader& rd) {
    rd.need(4, RasterIoCode::magic_mismatch, "file shorter than magic");
    if (std::memcmp(rd.cursor(), kMagic, 4) != 0)
        throw RasterIoError(RasterIoCode::magic_mismatch, "not a raster container");
    rd.skip(4);
    const uint16_t version = rd.u16(RasterIoCode::bad_header, "truncated header");
    if (version != kVersion)
        throw RasterIoError(RasterIoCode::unsupported_version,
                            "version " + std::to_string(version));
    RasterInfo info;
    info.dtype = rd.u8(RasterIoCode::bad_header, "truncated header");
    if (info.dtype != 1 && info.dtype != 2)
        throw RasterIoError(RasterIoCode::unsupported_dtype,
                            "dtype " + std::to_string(info.dtype));
    info.bands = rd.u8(RasterIoCode::bad_header, "truncated header");
    info.grid.width = rd.u32(RasterIoCode::bad_header, "truncated header");
    info.grid.height = rd.u32(RasterIoCode::bad_header, "truncated header");
    info.nodata = rd.f64(RasterIoCode::bad_header, "truncated header");
    info.grid.origin_x = rd.f64(RasterIoCode::bad_header, "truncated header");
    info.grid.origin_y = rd.f64(RasterIoCode::bad_header, "truncated header");
    info.grid.pixel_size_x = rd.f64(RasterIoCode::bad_header, "truncated header");
    info.grid.pixel_size_y = rd.f64(RasterIoCode::bad_header, "truncated header");
    const uint16_t tag_len = rd.u16(RasterIoCode::bad_header, "truncated header");
    rd.need(tag_len, RasterIoCode::bad_header, "truncated crs tag");
    info.grid.crs_tag.assign(reinterpret_cast<const char*>(rd.cursor()), tag_len);
    rd.skip(tag_len);
    if (info.bands < 1)
        throw RasterIoError(RasterIoCode::bad_header, "zero band count");
    if (info.grid.width == 0 || info.grid.height == 0)
        throw RasterIoError(RasterIoCode::bad_header, "zero raster extent");
    if (!(info.grid.pixel_size_x > 0.0) || !(info.grid.pixel_size_y > 0.0))
        throw RasterIoError(RasterIoCode::bad_header, "non-positive pixel size");
    return info;
}

template <typename T>
Raster<T> read_raster_impl(const std::string& path, uint8_t want_dtype, size_t value_size) {
    const std::vector<uint8_t> bytes = read_file(path);
    Reader rd(bytes.data(), bytes.size());
    const RasterInfo info = parse_header(rd);
    if (info.dtype != want_dtype)
        throw RasterIoError(RasterIoCode::dtype_mismatch,
                            "file holds dtype " + std::to_string(info.dtype));
    const size_t count = size_t(info.grid.width) * info.grid.height * info.bands;
    const size_t payload_bytes = count * value_size;
    rd.need(payload_bytes + 4, RasterIoCode::truncated_payload,
            "payload shorter than header promises");
    const uint32_t crc = payload_crc(rd.cursor(), payload_bytes);

    Raster<T> out(info.grid, info.bands, T(info.nodata));
    if constexpr (std::is_same_v<T, uint8_t>) {
        std::memcpy(out.values().data(), rd.cursor(), payload_bytes);
        rd.skip(payload_bytes);
    } else {
        for (size_t i = 0; i < count; ++i) {
            const uint32_t bits = rd.u32(RasterIoCode::truncated_payload, "payload");
            float v;
            std::memcpy(&v, &bits, 4);
            out.values()[i] = v;
        }
    }
    const uint32_t stored = rd.u32(RasterIoCode::truncated_payload, "missing checksum");
    if (stored != crc)
        throw RasterIoError(RasterIoCode::checksum_mismatch, "payload crc32 does not match");
    return out;
}

}  // namespace

const char* to_string(RasterIoCode code) {
    switch (code) {
        case RasterIoCode::io_failure: return "io failure";
        case RasterIoCode::magic_mismatch: return "magic mismatch";
        case RasterIoCode::unsupported_version: return "unsupported version";
        case RasterIoCode::unsupported_dtype: return "unsupported dtype";
        case RasterIoCode::bad_header: return "bad header";
        case RasterIoCode::dtype_mismatch: return "dtype mismatch";
        case RasterIoCode::truncated_payload: return "truncated payload";
        case RasterIoCode::checksum_mismatch: return "checksum mismatch";
    }
    return "unknown";
}

RasterInfo read_raster_info(const std::string& path) {
    const std::vector<uint8_t> bytes = read_file(path);
    Reader rd(bytes.data(), bytes.size());
    return parse_header(rd);
}

void write_raster(const ByteRaster& r, const std::string& path) {
    write_raster_impl(r, 1, path);
}

void write_raster(const FloatRaster& r, const std::string& path) {
    write_raster_impl(r, 2, path);
}

ByteRaster read_raster_u8(const std::string& path) {
    return read_raster_impl<uint8_t>(path, 1, 1);
}

FloatRaster read_raster_f32(const std::string& path) {
    return read_raster_impl<float>(path, 2, 4);
}

}  // namespace aqua

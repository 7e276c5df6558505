#include "aqua/unet_io.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>
#include <vector>

// Weights container, little-endian:
//   "AQMW" | version u16 | depth u8 | base_filters u16 | input_size u16 |
//   in_channels u8 | out_channels u8 | param_count u16 |
//   per parameter (fixed topological order): name_len u16 | name |
//     rank u8 | dims u32 x rank | float32 payload |
//   crc32 u32 over everything after the magic.

namespace aqua {

namespace {

constexpr char kMagic[4] = {'A', 'Q', 'M', 'W'};
constexpr uint16_t kVersion = 1;

void put_u16(std::vector<uint8_t>& b, uint16_t v) {
    b.push_back(uint8_t(v & 0xff));
    b.push_back(uint8_t(v >> 8));
}

void put_u32(std::vector<uint8_t>& b, uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(uint8_t((v >> (8 * i)) & 0xff));
}

class Reader {
public:
    Reader(const uint8_t* data, size_t size) : data_(data), size_(size) {}

    size_t remaining() const { return size_ - pos_; }
    const uint8_t* cursor() const { return data_ + pos_; }
    void skip(size_t n) { pos_ += n; }

    void need(size_t n, WeightsIoCode code, const char* what) const {
        if (remaining() < n) throw WeightsIoError(code, what);
    }

    uint8_t u8(WeightsIoCode code, const char* what) {
        need(1, code, what);
        return data_[pos_++];
    }

    uint16_t u16(WeightsIoCode code, const char* what) {
        need(2, code, what);
        uint16_t v = uint16_t(data_[pos_]) | uint16_t(data_[pos_ + 1]) << 8;
        pos_ += 2;
        return v;
    }

    uint32_t u32(WeightsIoCode code, const char* what) {
        need(4, code, what);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= uint32_t(data_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }

private:
    const uint8_t* data_;
    size_t size_;
    size_t pos_ = 0;
};

}  // namespace

const char* to_string(WeightsIoCode code) {
    switch (code) {
        case WeightsIoCode::io_failure: return "io failure";
        case WeightsIoCode::magic_mismatch: return "magic mismatch";
        case WeightsIoCode::unsupported_version: return "unsupported version";
        case WeightsIoCode::bad_header: return "bad header";
        case WeightsIoCode::config_mismatch: return "config mismatch";
        case WeightsIoCode::truncated_payload: return "truncated payload";
        case WeightsIoCode::checksum_mismatch: return "checksum mismatch";
    }
    return "unknown";
}

void save_weights(UNet<float>& net, const std::string& path) {
    const UNetConfig& cfg = net.config();
    auto refs = net.params();
    std::vector<uint8_t> bytes;
    bytes.insert(bytes.end(), kMagic, kMagic + 4);
    put_u16(bytes, kVersion);
    bytes.push_back(uint8_t(cfg.depth));
    put_u16(bytes, uint16_t(cfg.base_filters));
    put_u16(bytes, uint16_t(cfg.input_size));
    bytes.push_back(uint8_t(cfg.in_channels));
    bytes.push_back(uint8_t(cfg.out_channels));
    put_u16(bytes, uint16_t(refs.size()));
    for (const auto& ref : refs) {
        put_u16(bytes, uint16_t(ref.name.size()));
        bytes.insert(bytes.end(), ref.name.begin(), ref.name.end());
        bytes.push_back(uint8_t(ref.dims.size()));
        for (uint32_t d : ref.dims) put_u32(bytes, d);
        for (float v : *ref.data) {
            uint32_t bits;
            std::memcpy(&bits, &v, 4);
            put_u32(bytes, bits);
        }
    }
    const uint32_t crc = uint32_t(crc32(crc32(0L, Z_NULL, 0), bytes.data() + 4,
                                        uInt(bytes.size() - 4)));
    put_u32(bytes, crc);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw WeightsIoError(WeightsIoCode::io_failure, "cannot open " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    out.flush();
    if (!out) throw WeightsIoError(WeightsIoCode::io_failure, "cannot write " + path);
}

UNet<float> load_weights(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw WeightsIoError(WeightsIoCode::io_failure, "cannot open " + path);
    in.seekg(0, std::ios::end);
    const auto size = in.tellg();
    in.seekg(0, std::ios::beg);
    std::vector<uint8_t> bytes(static_cast<size_t>(size));
    if (size > 0) in.read(reinterpret_cast<char*>(bytes.data()), size);
    if (!in) throw WeightsIoError(WeightsIoCode::io_failure, "cannot read " + path);

    Reader rd(bytes.data(), bytes.size());
    rd.need(4, WeightsIoCode::magic_mismatch, "file shorter than magic");
    if (std::memcmp(rd.cursor(), kMagic, 4) != 0)
        throw WeightsIoError(WeightsIoCode::magic_mismatch, "not a weights container");
    rd.skip(4);

    // Verify the checksum before trusting any header fields.
    if (bytes.size() < 8)
        throw WeightsIoError(WeightsIoCode::truncated_payload, "missing checksum");
    const size_t body = bytes.size() - 8;
    const uint32_t crc = uint32_t(crc32(crc32(0L, Z_NULL, 0), bytes.data() + 4, uInt(body)));
    uint32_t stored = 0;
    for (int i = 0; i < 4; ++i) stored |= uint32_t(bytes[bytes.size() - 4 + i]) << (8 * i);
    if (crc != stored)
        throw WeightsIoError(WeightsIoCode::checksum_mismatch, "crc32 does not match");

    const uint16_t version = rd.u16(WeightsIoCode::bad_header, "truncated header");
    if (version != kVersion)
        throw WeightsIoError(WeightsIoCode::unsupported_version,
                             "version " + std::to_string(version));
    UNetConfig cfg;
    cfg.depth = rd.u8(WeightsIoCode::bad_header, "truncated header");
    cfg.base_filters = rd.u16(WeightsIoCode::bad_header, "truncated header");
    cfg.input_size = rd.u16(WeightsIoCode::bad_header, "truncated header");
    cfg.in_channels = rd.u8(WeightsIoCode::bad_header, "truncated header");
    cfg.out_channels = rd.u8(WeightsIoCode::bad_header, "truncated header");
    try {
        cfg.check();
    } catch (const std::invalid_argument& e) {
        throw WeightsIoError(WeightsIoCode::bad_header, e.what());
    }
    const uint16_t param_count = rd.u16(WeightsIoCode::bad_header, "truncated header");

    UNet<float> net(cfg);
    auto refs = net.params();
    if (param_count != refs.size())
        throw WeightsIoError(WeightsIoCode::config_mismatch,
                             "file holds " + std::to_string(param_count) + " parameters, config "
                             "implies " + std::to_string(refs.size()));
    for (const auto& ref : refs) {
        const uint16_t name_len = rd.u16(WeightsIoCode::truncated_payload, "parameter name");
        rd.need(name_len, WeightsIoCode::truncated_payload, "parameter name");
        const std::string name(reinterpret_cast<const char*>(rd.cursor()), name_len);
        rd.skip(name_len);
        if (name != ref.name)
            throw WeightsIoError(WeightsIoCode::config_mismatch,
                                 "expected parameter " + ref.name + ", found " + name);
        const uint8_t rank = rd.u8(WeightsIoCode::truncated_payload, "parameter rank");
        if (rank != ref.dims.size())
            throw WeightsIoError(WeightsIoCode::config_mismatch, "rank mismatch on " + name);
        size_t count = 1;
        for (int i = 0; i < rank; ++i) {
            const uint32_t d = rd.u32(WeightsIoCode::truncated_payload, "parameter dims");
            if (d != ref.dims[size_t(i)])
                throw WeightsIoError(WeightsIoCode::config_mismatch, "shape mismatch on " + name);
            count *= d;
        }
        rd.need(count * 4, WeightsIoCode::truncated_payload, "parameter payload");
        for (size_t i = 0; i < count; ++i) {
            const uint32_t bits = rd.u32(WeightsIoCode::truncated_payload, "parameter payload");
            float v;
            std::memcpy(&v, &bits, 4);
            (*ref.data)[i] = v;
        }
    }
    return net;
}

}  // namespace aqua

#pragma once

#include <string>

#include "aqua/unet.hpp"

namespace aqua {

enum class WeightsIoCode {
    io_failure,
    magic_mismatch,
    unsupported_version,
    bad_header,
    config_mismatch,
    truncated_payload,
    checksum_mismatch,
};

const char* to_string(WeightsIoCode code);

class WeightsIoError : public std::runtime_error {
public:
    WeightsIoError(WeightsIoCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
    WeightsIoCode code() const { return code_; }

private:
    WeightsIoCode code_;
};

void save_weights(UNet<float>& net, const std::string& path);
UNet<float> load_weights(const std::string& path);

}  // namespace aqua

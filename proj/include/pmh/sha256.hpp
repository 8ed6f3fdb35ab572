#pragma once

#include <cstdint>
#include <string>

namespace pmh {

// FIPS 180-4 SHA-256 of a byte string, hex-encoded. Used to stamp outputs
// with a content hash of their resolved configuration.
std::string sha256_hex(const std::string& data);

}  // namespace pmh

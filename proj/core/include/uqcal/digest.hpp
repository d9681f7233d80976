// digest.hpp — SHA-256 digests for run-manifest input tracking.

#pragma once

#include <string>
#include <string_view>

namespace uqcal {

// Hex-encoded SHA-256 of a byte string.
std::string sha256_hex(std::string_view data);

// Hex-encoded SHA-256 of a file's contents. Throws Error(io_error) if the
// file cannot be read.
std::string sha256_file_hex(const std::string& path);

}  // namespace uqcal

// sha256.hpp — content hashing for run manifests.

#pragma once

#include <filesystem>
#include <string>

namespace gazefeed {

// Hex digest (lowercase, 64 chars) of a byte string.
std::string sha256_hex(const std::string& bytes);

// Hex digest of a file's contents. Throws std::runtime_error if unreadable.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace gazefeed

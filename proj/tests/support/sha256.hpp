#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace testsupport {

// Compact SHA-256 for pinning generated-file digests in tests.
std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_file_hex(const std::filesystem::path& path);

}  // namespace testsupport

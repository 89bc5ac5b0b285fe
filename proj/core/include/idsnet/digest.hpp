#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>

namespace idsnet {

using Sha256 = std::array<std::byte, 32>;

Sha256 sha256(std::span<const std::byte> bytes);
Sha256 sha256_file(const std::filesystem::path& path);
std::string to_hex(const Sha256& digest);

}  // namespace idsnet

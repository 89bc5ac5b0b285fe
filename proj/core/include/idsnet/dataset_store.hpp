#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "idsnet/kdd_ingest.hpp"

namespace idsnet {

// Prepared-dataset container ("KDDCOL"), version 1:
//
//   magic "KDDCOL\0\1"  u32 version  u8 split  u64 rows  u32 columns
//   per column: str name, u8 type (0 f64, 1 categorical u32, 2 label u32),
//               categorical/label: u32 vocab size, vocab entries as str
//   body: column-major, little-endian, `rows` values per column
//   trailer: SHA-256 of all preceding bytes
//
// Strings are u16-length prefixed. Categorical vocabularies list values in
// first-appearance order.
inline constexpr std::uint32_t kDatasetFormatVersion = 1;

std::vector<std::byte> encode_dataset(const Dataset& ds);
Dataset decode_dataset(std::span<const std::byte> bytes, const std::string& context = "dataset");

void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace idsnet

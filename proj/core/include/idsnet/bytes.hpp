#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace idsnet {

// Little-endian binary encoder used by the dataset and checkpoint containers.
class ByteWriter {
 public:
  void u8(std::uint8_t v);
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f32(float v);
  void f64(double v);
  // u16 length prefix followed by the raw bytes.
  void str(std::string_view s);
  void raw(std::span<const std::byte> bytes);
  void raw(std::string_view bytes);

  std::size_t size() const noexcept { return buf_.size(); }
  const std::vector<std::byte>& bytes() const noexcept { return buf_; }
  std::vector<std::byte> take() && { return std::move(buf_); }

 private:
  void put(std::uint64_t v, int width);
  std::vector<std::byte> buf_;
};

// Bounds-checked little-endian decoder. Every read past the end throws
// FormatError naming `context`.
class ByteReader {
 public:
  ByteReader(std::span<const std::byte> bytes, std::string context);

  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  float f32();
  double f64();
  std::string str();
  std::span<const std::byte> raw(std::size_t n);

  std::size_t position() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
  bool done() const noexcept { return pos_ == bytes_.size(); }
  // Throws unless every byte has been consumed.
  void expect_done() const;

 private:
  std::uint64_t get(int width);
  std::span<const std::byte> bytes_;
  std::size_t pos_ = 0;
  std::string context_;
};

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path);

// Writes to `<path>.tmp` and renames over `path` only after the data is flushed.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::byte> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

}  // namespace idsnet

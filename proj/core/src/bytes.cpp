#include "idsnet/bytes.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "idsnet/errors.hpp"

namespace idsnet {

void ByteWriter::put(std::uint64_t v, int width) {
  for (int i = 0; i < width; ++i) buf_.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xffu));
}

void ByteWriter::u8(std::uint8_t v) { put(v, 1); }
void ByteWriter::u16(std::uint16_t v) { put(v, 2); }
void ByteWriter::u32(std::uint32_t v) { put(v, 4); }
void ByteWriter::u64(std::uint64_t v) { put(v, 8); }
void ByteWriter::f32(float v) { put(std::bit_cast<std::uint32_t>(v), 4); }
void ByteWriter::f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }

void ByteWriter::str(std::string_view s) {
  if (s.size() > 0xffffu) throw InputError("string too long for container: " + std::string(s.substr(0, 32)));
  u16(static_cast<std::uint16_t>(s.size()));
  raw(s);
}

void ByteWriter::raw(std::span<const std::byte> bytes) { buf_.insert(buf_.end(), bytes.begin(), bytes.end()); }

void ByteWriter::raw(std::string_view bytes) {
  const auto* p = reinterpret_cast<const std::byte*>(bytes.data());
  buf_.insert(buf_.end(), p, p + bytes.size());
}

ByteReader::ByteReader(std::span<const std::byte> bytes, std::string context)
    : bytes_(bytes), context_(std::move(context)) {}

std::uint64_t ByteReader::get(int width) {
  if (remaining() < static_cast<std::size_t>(width))
    throw FormatError(context_ + ": truncated at byte " + std::to_string(pos_));
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v |= std::to_integer<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
  pos_ += width;
  return v;
}

std::uint8_t ByteReader::u8() { return static_cast<std::uint8_t>(get(1)); }
std::uint16_t ByteReader::u16() { return static_cast<std::uint16_t>(get(2)); }
std::uint32_t ByteReader::u32() { return static_cast<std::uint32_t>(get(4)); }
std::uint64_t ByteReader::u64() { return get(8); }
float ByteReader::f32() { return std::bit_cast<float>(static_cast<std::uint32_t>(get(4))); }
double ByteReader::f64() { return std::bit_cast<double>(get(8)); }

std::string ByteReader::str() {
  const auto n = u16();
  auto span = raw(n);
  return std::string(reinterpret_cast<const char*>(span.data()), span.size());
}

std::span<const std::byte> ByteReader::raw(std::size_t n) {
  if (remaining() < n) throw FormatError(context_ + ": truncated at byte " + std::to_string(pos_));
  auto out = bytes_.subspan(pos_, n);
  pos_ += n;
  return out;
}

void ByteReader::expect_done() const {
  if (!done())
    throw FormatError(context_ + ": " + std::to_string(remaining()) + " trailing bytes");
}

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  std::vector<std::byte> bytes(size);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
  if (!in) throw InputError("failed reading " + path.string());
  return bytes;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::byte> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw InputError("failed writing " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::byte*>(text.data()), text.size()));
}

}  // namespace idsnet

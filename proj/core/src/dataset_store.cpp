#include "idsnet/dataset_store.hpp"

#include <array>
#include <cstring>
#include <unordered_map>

#include "idsnet/bytes.hpp"
#include "idsnet/digest.hpp"
#include "idsnet/errors.hpp"

namespace idsnet {

namespace {

constexpr std::array<std::byte, 8> kMagic{std::byte{'K'}, std::byte{'D'}, std::byte{'D'}, std::byte{'C'},
                                          std::byte{'O'}, std::byte{'L'}, std::byte{0},   std::byte{1}};

enum class ColumnType : std::uint8_t { f64 = 0, categorical = 1, label = 2 };

struct Vocab {
  std::vector<std::string> values;
  std::unordered_map<std::string, std::uint32_t> index;

  std::uint32_t intern(const std::string& v) {
    auto [it, inserted] = index.try_emplace(v, static_cast<std::uint32_t>(values.size()));
    if (inserted) values.push_back(v);
    return it->second;
  }
};

const std::string& categorical(const RawRecord& r, int which) {
  return which == 0 ? r.protocol_type : which == 1 ? r.service : r.flag;
}

std::string& categorical(RawRecord& r, int which) {
  return which == 0 ? r.protocol_type : which == 1 ? r.service : r.flag;
}

}  // namespace

std::vector<std::byte> encode_dataset(const Dataset& ds) {
  const auto& records = ds.records();
  const std::size_t rows = records.size();

  std::array<Vocab, 4> vocabs;  // protocol, service, flag, label
  std::array<std::vector<std::uint32_t>, 4> codes;
  for (auto& c : codes) c.reserve(rows);
  for (const auto& r : records) {
    for (int k = 0; k < 3; ++k) codes[k].push_back(vocabs[k].intern(categorical(r, k)));
    codes[3].push_back(vocabs[3].intern(r.label));
  }

  ByteWriter w;
  w.raw(kMagic);
  w.u32(kDatasetFormatVersion);
  w.u8(static_cast<std::uint8_t>(ds.split()));
  w.u64(rows);
  w.u32(static_cast<std::uint32_t>(kKddFieldCount));

  // Column table in KDD file order, label last.
  int cat = 0;
  for (const auto& col : kdd_columns()) {
    w.str(col.name);
    if (col.kind == ColumnKind::categorical) {
      w.u8(static_cast<std::uint8_t>(ColumnType::categorical));
      w.u32(static_cast<std::uint32_t>(vocabs[cat].values.size()));
      for (const auto& v : vocabs[cat].values) w.str(v);
      ++cat;
    } else {
      w.u8(static_cast<std::uint8_t>(ColumnType::f64));
    }
  }
  w.str("label");
  w.u8(static_cast<std::uint8_t>(ColumnType::label));
  w.u32(static_cast<std::uint32_t>(vocabs[3].values.size()));
  for (const auto& v : vocabs[3].values) w.str(v);

  std::size_t numeric = 0;
  cat = 0;
  for (const auto& col : kdd_columns()) {
    if (col.kind == ColumnKind::categorical) {
      for (auto c : codes[cat]) w.u32(c);
      ++cat;
    } else {
      for (const auto& r : records) w.f64(r.numeric[numeric]);
      ++numeric;
    }
  }
  for (auto c : codes[3]) w.u32(c);

  const auto digest = sha256(w.bytes());
  w.raw(digest);
  return std::move(w).take();
}

Dataset decode_dataset(std::span<const std::byte> bytes, const std::string& context) {
  if (bytes.size() < kMagic.size() + 32) throw FormatError(context + ": file too short");
  const auto body = bytes.first(bytes.size() - 32);
  const auto stored = bytes.last(32);
  const auto digest = sha256(body);
  if (std::memcmp(digest.data(), stored.data(), 32) != 0) throw FormatError(context + ": digest mismatch");

  ByteReader r(body, context);
  const auto magic = r.raw(kMagic.size());
  if (std::memcmp(magic.data(), kMagic.data(), kMagic.size()) != 0) throw FormatError(context + ": bad magic");
  const auto version = r.u32();
  if (version != kDatasetFormatVersion)
    throw CompatibilityError(context + ": dataset format version " + std::to_string(version) + ", expected " +
                             std::to_string(kDatasetFormatVersion));
  const auto split_tag = r.u8();
  if (split_tag > 1) throw FormatError(context + ": bad split tag");
  const auto rows = r.u64();
  const auto columns = r.u32();
  if (columns != kKddFieldCount) throw FormatError(context + ": unexpected column count " + std::to_string(columns));
  // Rough bound so a corrupted row count cannot trigger a huge allocation.
  if (rows > r.remaining()) throw FormatError(context + ": row count exceeds payload");

  std::vector<std::vector<std::string>> vocabs;
  std::vector<ColumnType> types;
  for (std::uint32_t c = 0; c < columns; ++c) {
    const auto name = r.str();
    const auto type = static_cast<ColumnType>(r.u8());
    const bool is_label = c + 1 == columns;
    const auto expected = is_label ? ColumnType::label
                          : kdd_columns()[c].kind == ColumnKind::categorical ? ColumnType::categorical
                                                                              : ColumnType::f64;
    if (type != expected || name != (is_label ? std::string_view("label") : kdd_columns()[c].name))
      throw FormatError(context + ": unexpected column '" + name + "'");
    types.push_back(type);
    if (type != ColumnType::f64) {
      std::vector<std::string> vocab(r.u32());
      for (auto& v : vocab) v = r.str();
      vocabs.push_back(std::move(vocab));
    }
  }

  std::vector<RawRecord> records(rows);
  std::size_t numeric = 0;
  int cat = 0;
  for (std::uint32_t c = 0; c < columns; ++c) {
    if (types[c] == ColumnType::f64) {
      for (auto& rec : records) rec.numeric[numeric] = r.f64();
      ++numeric;
    } else {
      const auto& vocab = vocabs[cat];
      for (auto& rec : records) {
        const auto code = r.u32();
        if (code >= vocab.size()) throw FormatError(context + ": vocabulary index out of range");
        if (types[c] == ColumnType::label)
          rec.label = vocab[code];
        else
          categorical(rec, cat) = vocab[code];
      }
      ++cat;
    }
  }
  r.expect_done();
  return Dataset(std::move(records), static_cast<Split>(split_tag));
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  write_file_atomic(path, encode_dataset(ds));
}

Dataset load_dataset(const std::filesystem::path& path) {
  return decode_dataset(read_file_bytes(path), path.string());
}

}  // namespace idsnet

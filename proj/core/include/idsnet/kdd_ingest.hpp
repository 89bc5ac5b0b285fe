#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace idsnet {

inline constexpr std::size_t kKddFeatureCount = 41;
inline constexpr std::size_t kKddFieldCount = kKddFeatureCount + 1;
inline constexpr std::size_t kNumericColumnCount = 38;
inline constexpr std::size_t kClassCount = 3;

// Retained attack classes. The integer values are the network output indices.
enum class ClassLabel : std::uint8_t { normal = 0, neptune = 1, smurf = 2 };

inline constexpr std::array<ClassLabel, kClassCount> kAllClasses{ClassLabel::normal, ClassLabel::neptune,
                                                                 ClassLabel::smurf};

std::string_view class_name(ClassLabel c);
// Case-insensitive; nullopt for names outside the three retained classes.
std::optional<ClassLabel> class_from_name(std::string_view name);
inline std::size_t class_index(ClassLabel c) { return static_cast<std::size_t>(c); }

enum class ColumnKind : std::uint8_t { integer, rate, categorical };

struct KddColumn {
  std::string_view name;
  ColumnKind kind;
};

// The 41 feature columns in file order.
std::span<const KddColumn> kdd_columns();
// Names of the 38 numeric columns in file order (duration first).
std::span<const std::string_view> numeric_column_names();

// One connection record. Numeric columns keep file order with the three
// categorical columns removed; NaN marks a missing value ("" or "?").
struct RawRecord {
  std::array<double, kNumericColumnCount> numeric{};
  std::string protocol_type;
  std::string service;
  std::string flag;
  // Verbatim label text without the trailing period.
  std::string label;

  double duration() const { return numeric[0]; }
  bool operator==(const RawRecord& other) const;
};

// `source` only labels error messages. `line_no` is 1-based.
RawRecord parse_kdd_line(std::string_view line, std::size_t line_no, std::string_view source = "<input>");

// Parses a whole KDD text buffer, in parallel chunks when the thread cap
// allows. Blank lines are skipped; the result preserves line order. On
// failure the error for the earliest bad line is thrown.
std::vector<RawRecord> parse_kdd_text(std::string_view text, std::string_view source = "<input>");

std::vector<RawRecord> parse_kdd_file(const std::filesystem::path& path);

// Inverse of parse_kdd_line for canonically formatted input: integer columns
// without decimals, rate columns with two decimals, label with trailing period.
std::string format_kdd_record(const RawRecord& record);

enum class Split : std::uint8_t { train = 0, test = 1 };
std::string_view split_name(Split s);

using ClassCounts = std::array<std::size_t, kClassCount>;

// Filtered, labelled records. Immutable after construction.
class Dataset {
 public:
  Dataset() = default;
  // Every record's label must name a retained class.
  Dataset(std::vector<RawRecord> records, Split split);

  const std::vector<RawRecord>& records() const noexcept { return records_; }
  const std::vector<ClassLabel>& labels() const noexcept { return labels_; }
  Split split() const noexcept { return split_; }
  const ClassCounts& counts() const noexcept { return counts_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  // Subset in the order given by `rows`.
  Dataset select(std::span<const std::size_t> rows) const;

 private:
  std::vector<RawRecord> records_;
  std::vector<ClassLabel> labels_;
  Split split_ = Split::train;
  ClassCounts counts_{};
};

// Keeps records whose lower-cased label is in `keep`, preserving order.
Dataset filter_classes(std::vector<RawRecord> records, std::span<const ClassLabel> keep, Split split);
Dataset filter_classes(const Dataset& ds, std::span<const ClassLabel> keep);

// Parses a comma-separated class list such as "normal,neptune,smurf".
// Throws InputError on unknown or duplicate names.
std::vector<ClassLabel> parse_class_list(std::string_view list);

// Fraction of records per class. Throws InputError on an empty dataset.
std::array<double, kClassCount> class_distribution(const Dataset& ds);

}  // namespace idsnet

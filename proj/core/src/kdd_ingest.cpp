#include "idsnet/kdd_ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "idsnet/errors.hpp"
#include "idsnet/parallel.hpp"

namespace idsnet {

namespace {

constexpr std::array<KddColumn, kKddFeatureCount> kColumns{{
    {"duration", ColumnKind::integer},
    {"protocol_type", ColumnKind::categorical},
    {"service", ColumnKind::categorical},
    {"flag", ColumnKind::categorical},
    {"src_bytes", ColumnKind::integer},
    {"dst_bytes", ColumnKind::integer},
    {"land", ColumnKind::integer},
    {"wrong_fragment", ColumnKind::integer},
    {"urgent", ColumnKind::integer},
    {"hot", ColumnKind::integer},
    {"num_failed_logins", ColumnKind::integer},
    {"logged_in", ColumnKind::integer},
    {"num_compromised", ColumnKind::integer},
    {"root_shell", ColumnKind::integer},
    {"su_attempted", ColumnKind::integer},
    {"num_root", ColumnKind::integer},
    {"num_file_creations", ColumnKind::integer},
    {"num_shells", ColumnKind::integer},
    {"num_access_files", ColumnKind::integer},
    {"num_outbound_cmds", ColumnKind::integer},
    {"is_host_login", ColumnKind::integer},
    {"is_guest_login", ColumnKind::integer},
    {"count", ColumnKind::integer},
    {"srv_count", ColumnKind::integer},
    {"serror_rate", ColumnKind::rate},
    {"srv_serror_rate", ColumnKind::rate},
    {"rerror_rate", ColumnKind::rate},
    {"srv_rerror_rate", ColumnKind::rate},
    {"same_srv_rate", ColumnKind::rate},
    {"diff_srv_rate", ColumnKind::rate},
    {"srv_diff_host_rate", ColumnKind::rate},
    {"dst_host_count", ColumnKind::integer},
    {"dst_host_srv_count", ColumnKind::integer},
    {"dst_host_same_srv_rate", ColumnKind::rate},
    {"dst_host_diff_srv_rate", ColumnKind::rate},
    {"dst_host_same_src_port_rate", ColumnKind::rate},
    {"dst_host_srv_diff_host_rate", ColumnKind::rate},
    {"dst_host_serror_rate", ColumnKind::rate},
    {"dst_host_srv_serror_rate", ColumnKind::rate},
    {"dst_host_rerror_rate", ColumnKind::rate},
    {"dst_host_srv_rerror_rate", ColumnKind::rate},
}};

constexpr auto kNumericNames = [] {
  std::array<std::string_view, kNumericColumnCount> names{};
  std::size_t k = 0;
  for (const auto& c : kColumns)
    if (c.kind != ColumnKind::categorical) names[k++] = c.name;
  return names;
}();

constexpr std::array<std::string_view, kClassCount> kClassNames{"normal", "neptune", "smurf"};

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool is_missing(std::string_view field) { return field.empty() || field == "?"; }

void append_number(std::string& out, double v, ColumnKind kind) {
  if (std::isnan(v)) return;
  char buf[64];
  if (kind == ColumnKind::rate) {
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
    double back = 0;
    std::from_chars(buf, end, back);
    if (ec == std::errc{} && back == v) {
      out.append(buf, end);
      return;
    }
  }
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
  out.append(buf, end);
}

}  // namespace

std::string_view class_name(ClassLabel c) { return kClassNames.at(class_index(c)); }

std::optional<ClassLabel> class_from_name(std::string_view name) {
  const auto lower = lowercase(name);
  for (std::size_t i = 0; i < kClassCount; ++i)
    if (lower == kClassNames[i]) return static_cast<ClassLabel>(i);
  return std::nullopt;
}

std::span<const KddColumn> kdd_columns() { return kColumns; }

std::span<const std::string_view> numeric_column_names() { return kNumericNames; }

bool RawRecord::operator==(const RawRecord& other) const {
  for (std::size_t i = 0; i < kNumericColumnCount; ++i) {
    const bool a = std::isnan(numeric[i]), b = std::isnan(other.numeric[i]);
    if (a != b || (!a && numeric[i] != other.numeric[i])) return false;
  }
  return protocol_type == other.protocol_type && service == other.service && flag == other.flag &&
         label == other.label;
}

RawRecord parse_kdd_line(std::string_view line, std::size_t line_no, std::string_view source) {
  std::array<std::string_view, kKddFieldCount> fields;
  std::size_t count = 0;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    const auto piece = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    if (count < kKddFieldCount) fields[count] = trim(piece);
    ++count;
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (count != kKddFieldCount)
    throw ParseError(std::string(source), line_no, 0,
                     "expected " + std::to_string(kKddFieldCount) + " fields, found " + std::to_string(count));

  RawRecord rec;
  std::size_t numeric = 0;
  for (std::size_t i = 0; i < kKddFeatureCount; ++i) {
    const auto field = fields[i];
    switch (kColumns[i].kind) {
      case ColumnKind::categorical:
        if (field.empty())
          throw ParseError(std::string(source), line_no, i + 1, "empty " + std::string(kColumns[i].name));
        (i == 1 ? rec.protocol_type : i == 2 ? rec.service : rec.flag) = std::string(field);
        break;
      default: {
        double v = std::numeric_limits<double>::quiet_NaN();
        if (!is_missing(field)) {
          auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
          if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(v))
            throw ParseError(std::string(source), line_no, i + 1,
                             "unparseable " + std::string(kColumns[i].name) + " value '" + std::string(field) + "'");
        }
        rec.numeric[numeric++] = v;
      }
    }
  }
  auto label = fields[kKddFeatureCount];
  if (!label.empty() && label.back() == '.') label.remove_suffix(1);
  if (label.empty()) throw ParseError(std::string(source), line_no, kKddFieldCount, "empty label");
  rec.label = std::string(label);
  return rec;
}

std::vector<RawRecord> parse_kdd_text(std::string_view text, std::string_view source) {
  struct Line {
    std::string_view text;
    std::size_t number;
  };
  std::vector<Line> lines;
  std::size_t pos = 0, number = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    ++number;
    const auto body = trim(text.substr(pos, nl - pos));
    if (!body.empty()) lines.push_back({body, number});
    pos = nl + 1;
  }

  std::vector<RawRecord> out(lines.size());
  parallel_for(
      lines.size(),
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) out[i] = parse_kdd_line(lines[i].text, lines[i].number, source);
      },
      4096);
  return out;
}

std::vector<RawRecord> parse_kdd_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_kdd_text(buf.str(), path.string());
}

std::string format_kdd_record(const RawRecord& record) {
  std::string out;
  out.reserve(160);
  std::size_t numeric = 0;
  for (std::size_t i = 0; i < kKddFeatureCount; ++i) {
    if (i) out.push_back(',');
    if (kColumns[i].kind == ColumnKind::categorical)
      out += (i == 1 ? record.protocol_type : i == 2 ? record.service : record.flag);
    else
      append_number(out, record.numeric[numeric++], kColumns[i].kind);
  }
  out.push_back(',');
  out += record.label;
  out.push_back('.');
  return out;
}

std::string_view split_name(Split s) { return s == Split::train ? "train" : "test"; }

Dataset::Dataset(std::vector<RawRecord> records, Split split) : records_(std::move(records)), split_(split) {
  labels_.reserve(records_.size());
  for (const auto& r : records_) {
    const auto c = class_from_name(r.label);
    if (!c) throw InputError("record label '" + r.label + "' is not a retained class");
    labels_.push_back(*c);
    ++counts_[class_index(*c)];
  }
}

Dataset Dataset::select(std::span<const std::size_t> rows) const {
  std::vector<RawRecord> picked;
  picked.reserve(rows.size());
  for (auto r : rows) picked.push_back(records_.at(r));
  return Dataset(std::move(picked), split_);
}

Dataset filter_classes(std::vector<RawRecord> records, std::span<const ClassLabel> keep, Split split) {
  std::vector<RawRecord> kept;
  for (auto& r : records) {
    const auto c = class_from_name(r.label);
    if (c && std::find(keep.begin(), keep.end(), *c) != keep.end()) kept.push_back(std::move(r));
  }
  return Dataset(std::move(kept), split);
}

Dataset filter_classes(const Dataset& ds, std::span<const ClassLabel> keep) {
  return filter_classes(ds.records(), keep, ds.split());
}

std::vector<ClassLabel> parse_class_list(std::string_view list) {
  std::vector<ClassLabel> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    auto comma = list.find(',', start);
    if (comma == std::string_view::npos) comma = list.size();
    const auto name = trim(list.substr(start, comma - start));
    const auto c = class_from_name(name);
    if (!c) throw InputError("unknown class '" + std::string(name) + "' (expected normal, neptune or smurf)");
    if (std::find(out.begin(), out.end(), *c) != out.end())
      throw InputError("class '" + std::string(name) + "' listed twice");
    out.push_back(*c);
    start = comma + 1;
  }
  return out;
}

std::array<double, kClassCount> class_distribution(const Dataset& ds) {
  if (ds.empty()) throw InputError("class distribution of an empty dataset");
  std::array<double, kClassCount> out{};
  const auto n = static_cast<double>(ds.size());
  for (std::size_t i = 0; i < kClassCount; ++i) out[i] = static_cast<double>(ds.counts()[i]) / n;
  return out;
}

}  // namespace idsnet

#include "lbsn/checkin.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <unordered_set>

#include <json.hpp>

#include "text.hpp"

namespace lbsn {

namespace {

ParseError timestamp_error(std::string_view text) {
  return ParseError(ParseErrorKind::bad_timestamp,
                    "unparseable timestamp '" + std::string(text) + "'");
}

template <typename Int>
bool parse_int(std::string_view text, Int& out) {
  if (text.empty()) return false;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

Timestamp from_civil(int y, unsigned mon, unsigned d, int hh, int mm, int ss,
                     std::string_view text) {
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{mon}, day{d}};
  if (!ymd.ok() || hh < 0 || hh > 23 || mm < 0 || mm > 59 || ss < 0 || ss > 60) {
    throw timestamp_error(text);
  }
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<Timestamp>(days) * 86400 + hh * 3600 + mm * 60 + ss;
}

bool parse_clock(std::string_view text, int& hh, int& mm, int& ss) {
  if (text.size() != 8 || text[2] != ':' || text[5] != ':') return false;
  return parse_int(text.substr(0, 2), hh) && parse_int(text.substr(3, 2), mm) &&
         parse_int(text.substr(6, 2), ss);
}

// "Tue Apr 03 18:00:09 +0000 2012"
std::optional<Timestamp> parse_ctime_like(std::string_view text) {
  static constexpr std::array<std::string_view, 12> months = {
      "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
  const auto parts = detail::split_ws(text);
  if (parts.size() != 6) return std::nullopt;
  const auto month_it = std::find(months.begin(), months.end(), parts[1]);
  if (month_it == months.end()) return std::nullopt;
  unsigned day = 0;
  int year = 0, hh = 0, mm = 0, ss = 0;
  if (!parse_int(parts[2], day) || !parse_int(parts[5], year) ||
      !parse_clock(parts[3], hh, mm, ss)) {
    return std::nullopt;
  }
  const auto& offset = parts[4];
  if (offset.size() != 5 || (offset[0] != '+' && offset[0] != '-')) return std::nullopt;
  int off_h = 0, off_m = 0;
  if (!parse_int(offset.substr(1, 2), off_h) || !parse_int(offset.substr(3, 2), off_m)) {
    return std::nullopt;
  }
  const int sign = offset[0] == '-' ? -1 : 1;
  const auto month = static_cast<unsigned>(month_it - months.begin()) + 1;
  return from_civil(year, month, day, hh, mm, ss, text) - sign * (off_h * 3600 + off_m * 60);
}

// "2012-04-03T18:00:09Z", "2012-04-03 18:00:09"
std::optional<Timestamp> parse_iso(std::string_view text) {
  if (!text.empty() && text.back() == 'Z') text.remove_suffix(1);
  if (text.size() != 19 || text[4] != '-' || text[7] != '-' ||
      (text[10] != 'T' && text[10] != ' ')) {
    return std::nullopt;
  }
  int year = 0, hh = 0, mm = 0, ss = 0;
  unsigned month = 0, day = 0;
  if (!parse_int(text.substr(0, 4), year) || !parse_int(text.substr(5, 2), month) ||
      !parse_int(text.substr(8, 2), day) || !parse_clock(text.substr(11), hh, mm, ss)) {
    return std::nullopt;
  }
  return from_civil(year, month, day, hh, mm, ss, text);
}

double parse_coordinate(std::string_view text, double limit, const char* name) {
  double value = 0.0;
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), last, value);
  if (text.empty() || ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw ParseError(ParseErrorKind::bad_coordinate,
                     std::string("unparseable ") + name + " '" + std::string(text) + "'");
  }
  if (value < -limit || value > limit) {
    throw ParseError(ParseErrorKind::bad_coordinate,
                     std::string(name) + " out of range: " + std::string(text));
  }
  return value;
}

}  // namespace

ParseError::ParseError(ParseErrorKind kind, const std::string& message, std::size_t line)
    : Error(line == 0 ? message : "line " + std::to_string(line) + ": " + message),
      kind_(kind),
      line_(line) {}

Schema Schema::identity() {
  return Schema{.user = 0, .venue = 1, .category = 2, .latitude = 3, .longitude = 4,
                .timestamp = 5, .n_columns = 6};
}

void Schema::validate() const {
  std::array<std::size_t, 6> cols = {user, venue, category, latitude, longitude, timestamp};
  for (auto c : cols) {
    if (c >= n_columns) {
      throw ConfigError("schema column " + std::to_string(c) + " outside a " +
                        std::to_string(n_columns) + "-column record");
    }
  }
  std::sort(cols.begin(), cols.end());
  if (std::adjacent_find(cols.begin(), cols.end()) != cols.end()) {
    throw ConfigError("schema maps two fields to the same column");
  }
}

Timestamp parse_timestamp(std::string_view text) {
  text = detail::trim(text);
  if (text.empty()) throw timestamp_error(text);
  if (text.find_first_not_of("0123456789") == std::string_view::npos) {
    Timestamp value = 0;
    if (!parse_int(text, value)) throw timestamp_error(text);
    return value;
  }
  if (auto t = parse_ctime_like(text)) {
    if (*t < 0) throw timestamp_error(text);
    return *t;
  }
  if (auto t = parse_iso(text)) {
    if (*t < 0) throw timestamp_error(text);
    return *t;
  }
  throw timestamp_error(text);
}

CheckIn parse_checkin_line(std::string_view line, const Schema& schema) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  const auto fields = detail::split(line, '\t');
  if (fields.size() != schema.n_columns) {
    throw ParseError(ParseErrorKind::malformed_line,
                     "expected " + std::to_string(schema.n_columns) + " columns, got " +
                         std::to_string(fields.size()));
  }
  CheckIn c;
  c.user_id = std::string(fields[schema.user]);
  c.venue_id = std::string(fields[schema.venue]);
  if (c.user_id.empty() || c.venue_id.empty()) {
    throw ParseError(ParseErrorKind::malformed_line, "empty user or venue id");
  }
  c.category = std::string(fields[schema.category]);
  c.latitude = parse_coordinate(fields[schema.latitude], 90.0, "latitude");
  c.longitude = parse_coordinate(fields[schema.longitude], 180.0, "longitude");
  c.timestamp = parse_timestamp(fields[schema.timestamp]);
  return c;
}

std::string format_checkin_line(const CheckIn& checkin, const Schema& schema) {
  std::vector<std::string> cols(schema.n_columns);
  cols[schema.user] = checkin.user_id;
  cols[schema.venue] = checkin.venue_id;
  cols[schema.category] = checkin.category;
  cols[schema.latitude] = detail::format_double(checkin.latitude);
  cols[schema.longitude] = detail::format_double(checkin.longitude);
  cols[schema.timestamp] = std::to_string(checkin.timestamp);
  std::string out;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i].find_first_of("\t\r\n") != std::string::npos) {
      throw ConfigError("field contains a tab or newline: " + cols[i]);
    }
    if (i) out += '\t';
    out += cols[i];
  }
  return out;
}

Dataset parse_dataset(std::istream& in, const Schema& schema, OnError on_error) {
  schema.validate();
  Dataset ds;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (detail::trim(view).empty()) continue;
    try {
      ds.checkins.push_back(parse_checkin_line(view, schema));
    } catch (const ParseError& e) {
      if (on_error == OnError::abort) throw ParseError(e.kind(), e.what(), line_no);
      ++ds.skipped_lines;
    }
  }
  ds.stats = compute_stats(ds.checkins);
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path, const Schema& schema, OnError on_error) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset: " + path.string());
  auto ds = parse_dataset(in, schema, on_error);
  if (in.bad()) throw IoError("read failure: " + path.string());
  return ds;
}

DatasetStats compute_stats(std::span<const CheckIn> checkins) {
  DatasetStats s;
  if (checkins.empty()) return s;
  std::unordered_set<std::string_view> users, venues;
  s.time_min = checkins.front().timestamp;
  s.time_max = checkins.front().timestamp;
  for (const auto& c : checkins) {
    users.insert(c.user_id);
    venues.insert(c.venue_id);
    s.time_min = std::min(s.time_min, c.timestamp);
    s.time_max = std::max(s.time_max, c.timestamp);
  }
  s.n_checkins = checkins.size();
  s.n_users = users.size();
  s.n_venues = venues.size();
  return s;
}

std::string to_json(const DatasetStats& stats) {
  nlohmann::ordered_json j;
  j["n_checkins"] = stats.n_checkins;
  j["n_users"] = stats.n_users;
  j["n_venues"] = stats.n_venues;
  j["time_min"] = stats.time_min;
  j["time_max"] = stats.time_max;
  return j.dump();
}

}  // namespace lbsn

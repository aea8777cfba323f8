#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lbsn/error.hpp"

namespace lbsn {

/// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

struct CheckIn {
  std::string user_id;
  std::string venue_id;
  std::string category;
  double latitude = 0.0;
  double longitude = 0.0;
  Timestamp timestamp = 0;

  friend bool operator==(const CheckIn&, const CheckIn&) = default;
};

struct DatasetStats {
  std::size_t n_checkins = 0;
  std::size_t n_users = 0;
  std::size_t n_venues = 0;
  Timestamp time_min = 0;
  Timestamp time_max = 0;

  friend bool operator==(const DatasetStats&, const DatasetStats&) = default;
};

/// Column indices of the six semantic fields in a tab-separated record.
///
/// The default layout is the common check-in dump:
///   user, venue, category-id, category-name, lat, lon, tz-offset, utc-time
/// The timezone offset column is ignored; times are normalized to UTC.
struct Schema {
  std::size_t user = 0;
  std::size_t venue = 1;
  std::size_t category = 3;
  std::size_t latitude = 4;
  std::size_t longitude = 5;
  std::size_t timestamp = 7;
  std::size_t n_columns = 8;

  /// user, venue, category, lat, lon, time.
  static Schema identity();

  /// Throws ConfigError if a column is out of range or two fields share one.
  void validate() const;

  friend bool operator==(const Schema&, const Schema&) = default;
};

enum class ParseErrorKind { malformed_line, bad_coordinate, bad_timestamp };

class ParseError : public Error {
 public:
  ParseError(ParseErrorKind kind, const std::string& message, std::size_t line = 0);

  ParseErrorKind kind() const noexcept { return kind_; }
  /// 1-based line number, 0 when unknown.
  std::size_t line() const noexcept { return line_; }

 private:
  ParseErrorKind kind_;
  std::size_t line_;
};

/// Accepts integral epoch seconds, "Tue Apr 03 18:00:09 +0000 2012" and
/// ISO-8601 "2012-04-03T18:00:09Z" (space separator and missing Z allowed).
Timestamp parse_timestamp(std::string_view text);

CheckIn parse_checkin_line(std::string_view line, const Schema& schema);

/// Inverse of parse_checkin_line. Columns not mapped by the schema are empty,
/// the timestamp is written as epoch seconds.
std::string format_checkin_line(const CheckIn& checkin, const Schema& schema);

enum class OnError { skip, abort };

struct Dataset {
  std::vector<CheckIn> checkins;
  DatasetStats stats;
  std::size_t skipped_lines = 0;
};

Dataset parse_dataset(std::istream& in, const Schema& schema, OnError on_error);
Dataset load_dataset(const std::filesystem::path& path, const Schema& schema, OnError on_error);

DatasetStats compute_stats(std::span<const CheckIn> checkins);

/// Single-line JSON object.
std::string to_json(const DatasetStats& stats);

}  // namespace lbsn

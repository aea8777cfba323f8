#include <doctest.h>

#include <random>
#include <set>
#include <sstream>

#include "lbsn/checkin.hpp"

using namespace lbsn;

TEST_CASE("identity schema maps fields directly") {
  const auto c = parse_checkin_line("u1\tv1\tBar\t40.7\t-74.0\t1333478580", Schema::identity());
  CHECK(c == CheckIn{"u1", "v1", "Bar", 40.7, -74.0, 1333478580});
}

TEST_CASE("default layout reads the eight-column dump") {
  const std::string line =
      "470\t49bbd6c0f964a520f4531fe3\t4bf58dd8d48988d127951735\tArts & Crafts Store\t"
      "40.719810375488535\t-74.00258103213994\t-240\tTue Apr 03 18:00:09 +0000 2012";
  const auto c = parse_checkin_line(line, Schema{});
  CHECK(c.user_id == "470");
  CHECK(c.category == "Arts & Crafts Store");
  CHECK(c.latitude == doctest::Approx(40.7198103755));
  CHECK(c.timestamp == 1333476009);
}

TEST_CASE("timestamps") {
  CHECK(parse_timestamp("1333476009") == 1333476009);
  CHECK(parse_timestamp("Tue Apr 03 18:00:09 +0000 2012") == 1333476009);
  CHECK(parse_timestamp("Tue Apr 03 20:00:09 +0200 2012") == 1333476009);
  CHECK(parse_timestamp("2012-04-03T18:00:09Z") == 1333476009);
  CHECK(parse_timestamp("2012-04-03 18:00:09") == 1333476009);
  CHECK_THROWS_AS(parse_timestamp("yesterday"), ParseError);
  CHECK_THROWS_AS(parse_timestamp("2012-02-30T00:00:00Z"), ParseError);
}

TEST_CASE("parse errors carry their kind") {
  const auto schema = Schema::identity();
  auto kind_of = [&](const std::string& line) {
    try {
      parse_checkin_line(line, schema);
    } catch (const ParseError& e) {
      return e.kind();
    }
    FAIL("no error for " << line);
    return ParseErrorKind::malformed_line;
  };
  CHECK(kind_of("u1\tv1\tBar\t95.0\t-74.0\t1") == ParseErrorKind::bad_coordinate);
  CHECK(kind_of("u1\tv1\tBar\t40\t-181\t1") == ParseErrorKind::bad_coordinate);
  CHECK(kind_of("u1\tv1\tBar\tnan\t0\t1") == ParseErrorKind::bad_coordinate);
  CHECK(kind_of("u1\tv1\tBar\t40.7\t-74.0") == ParseErrorKind::malformed_line);
  CHECK(kind_of("\tv1\tBar\t40.7\t-74.0\t1") == ParseErrorKind::malformed_line);
  CHECK(kind_of("u1\tv1\tBar\t40.7\t-74.0\tsoon") == ParseErrorKind::bad_timestamp);
}

TEST_CASE("dataset parsing and error policy") {
  const auto schema = Schema::identity();
  SUBCASE("empty input") {
    std::istringstream in("");
    const auto d = parse_dataset(in, schema, OnError::abort);
    CHECK(d.checkins.empty());
    CHECK(d.stats == DatasetStats{});
  }
  SUBCASE("five valid lines") {
    std::ostringstream text;
    for (int i = 0; i < 5; ++i) text << "u" << i % 2 << "\tv" << i << "\tc\t1\t2\t" << 100 + i << "\n";
    std::istringstream in(text.str());
    const auto d = parse_dataset(in, schema, OnError::abort);
    CHECK(d.stats.n_checkins == 5);
    CHECK(d.stats.n_users == 2);
    CHECK(d.stats.n_venues == 5);
    CHECK(d.stats.time_min == 100);
    CHECK(d.stats.time_max == 104);
  }
  SUBCASE("skip counts malformed lines, abort reports the line") {
    const std::string text = "u1\tv1\tc\t1\t2\t3\nu2\tv1\tc\t1\t2\nu1\tv2\tc\t1\t2\t4\nu3\tv3\tc\t1\t2\t5\n";
    std::istringstream skip(text);
    const auto d = parse_dataset(skip, schema, OnError::skip);
    CHECK(d.checkins.size() == 3);
    CHECK(d.skipped_lines == 1);
    std::istringstream abort(text);
    try {
      parse_dataset(abort, schema, OnError::abort);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
  }
  SUBCASE("duplicate lines stay distinct check-ins") {
    std::istringstream in("u1\tv1\tc\t1\t2\t3\nu1\tv1\tc\t1\t2\t3\n");
    CHECK(parse_dataset(in, schema, OnError::abort).checkins.size() == 2);
  }
}

TEST_CASE("property: format then parse is the identity") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lat(-90, 90), lon(-180, 180);
  std::uniform_int_distribution<Timestamp> t(0, 4'000'000'000);
  for (const auto& schema : {Schema{}, Schema::identity()}) {
    for (int i = 0; i < 500; ++i) {
      CheckIn c{"user" + std::to_string(rng() % 1000), "venue" + std::to_string(rng()),
                "Cat " + std::to_string(rng() % 7), lat(rng), lon(rng), t(rng)};
      CHECK(parse_checkin_line(format_checkin_line(c, schema), schema) == c);
    }
  }
}

TEST_CASE("property: skip mode survives arbitrary text") {
  std::mt19937_64 rng(5);
  const std::string alphabet = "uv0123456789.-\t\n\r ,:+ZT";
  for (int trial = 0; trial < 300; ++trial) {
    std::string text;
    const auto n = rng() % 400;
    for (std::size_t i = 0; i < n; ++i) text += alphabet[rng() % alphabet.size()];
    // splice in a few valid lines so the subset is non-trivial
    const auto valid = rng() % 4;
    for (std::size_t i = 0; i < valid; ++i) text += "\nu" + std::to_string(i) + "\tv\tc\t1\t1\t7\n";
    std::istringstream in(text);
    Dataset d;
    REQUIRE_NOTHROW(d = parse_dataset(in, Schema::identity(), OnError::skip));
    CHECK(d.checkins.size() >= valid);
  }
}

TEST_CASE("property: stats equal brute-force distinct counts") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<CheckIn> cs;
    const auto n = rng() % 50;
    for (std::size_t i = 0; i < n; ++i) {
      cs.push_back({"u" + std::to_string(rng() % 6), "v" + std::to_string(rng() % 9), "c", 0, 0,
                    static_cast<Timestamp>(rng() % 1000)});
    }
    std::set<std::string> users, venues;
    Timestamp lo = 1000, hi = -1;
    for (const auto& c : cs) {
      users.insert(c.user_id);
      venues.insert(c.venue_id);
      lo = std::min(lo, c.timestamp);
      hi = std::max(hi, c.timestamp);
    }
    const auto s = compute_stats(cs);
    CHECK(s.n_checkins == n);
    CHECK(s.n_users == users.size());
    CHECK(s.n_venues == venues.size());
    if (n > 0) {
      CHECK(s.time_min == lo);
      CHECK(s.time_max == hi);
    }
  }
}

TEST_CASE("schema validation") {
  Schema s = Schema::identity();
  s.venue = s.user;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = Schema::identity();
  s.timestamp = 9;
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

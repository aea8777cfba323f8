#include <doctest.h>

#include <map>
#include <random>
#include <sstream>

#include "lbsn/graph.hpp"
#include "lbsn/graph_io.hpp"
#include "support/oracles.hpp"

using namespace lbsn;

namespace {

std::vector<CheckIn> visits(std::initializer_list<std::pair<const char*, const char*>> pairs) {
  std::vector<CheckIn> out;
  Timestamp t = 1;
  for (auto [u, v] : pairs) out.push_back({u, v, "c", 1.0, 2.0, t++});
  return out;
}

}  // namespace

TEST_CASE("graph from check-ins counts multilinks") {
  SUBCASE("empty") {
    const auto g = BipartiteGraph::from_checkins({});
    CHECK(g.n_users() == 0);
    CHECK(g.n_venues() == 0);
    CHECK(g.n_checkins() == 0);
  }
  SUBCASE("three check-ins") {
    const auto cs = visits({{"u1", "v1"}, {"u1", "v1"}, {"u2", "v1"}});
    const auto g = BipartiteGraph::from_checkins(cs);
    const auto v1 = g.venue("v1");
    CHECK(g.pair_count(g.user("u1"), v1) == 2);
    CHECK(g.pair_count(g.user("u2"), v1) == 1);
    CHECK(g.binary_degree(v1) == 2);
    CHECK(g.weighted_degree(v1) == 3);
    CHECK(g.n_pairs() == 2);
    CHECK_THROWS_AS(g.user("nobody"), UnknownNode);
  }
}

TEST_CASE("property: adjacency transposes agree on random graphs") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const auto d = oracle::random_dense(rng, 1 + rng() % 12, 1 + rng() % 12, 0.3, 4);
    const auto g = oracle::to_graph(d);
    REQUIRE_NOTHROW(g.check_invariants());
    std::size_t checkins = 0, degree_sum = 0;
    for (std::size_t u = 0; u < d.users(); ++u) {
      for (std::size_t v = 0; v < d.venues(); ++v) {
        CHECK(g.pair_count(user_at(u), venue_at(v)) == d.counts[u][v]);
        checkins += d.counts[u][v];
      }
    }
    for (std::size_t v = 0; v < g.n_venues(); ++v) {
      degree_sum += g.binary_degree(venue_at(v));
      for (const auto& link : g.users_of(venue_at(v))) {
        CHECK(g.pair_count(link.user, venue_at(v)) == link.count);
      }
      CHECK(g.binary_degree(venue_at(v)) <= g.weighted_degree(venue_at(v)));
    }
    CHECK(degree_sum == g.n_pairs());
    CHECK(g.n_checkins() == checkins);
  }
}

TEST_CASE("degree filter") {
  const auto toy = oracle::to_graph(oracle::toy());
  CHECK(filter_low_degree_venues(toy, 0) == toy);
  const auto f = filter_low_degree_venues(toy, 2);
  CHECK(f.n_venues() == 3);
  CHECK_FALSE(f.find_venue(oracle::venue_name(3)));
  CHECK(f.n_users() == 3);
  CHECK(f.n_pairs() == 6);
  REQUIRE_NOTHROW(f.check_invariants());
}

TEST_CASE("dominance filter") {
  std::vector<CheckIn> cs;
  for (int i = 0; i < 9; ++i) cs.push_back({"u1", "va", "c", 0, 0, i});
  cs.push_back({"u2", "va", "c", 0, 0, 9});
  for (int i = 0; i < 5; ++i) cs.push_back({"u1", "vb", "c", 0, 0, i});
  for (int i = 0; i < 5; ++i) cs.push_back({"u2", "vb", "c", 0, 0, i});
  const auto g = BipartiteGraph::from_checkins(cs);
  const auto f = filter_dominated_venues(g, 0.9);
  CHECK_FALSE(f.find_venue("va"));
  CHECK(f.find_venue("vb"));
  CHECK(f.n_users() == 2);
  CHECK_THROWS_AS(filter_dominated_venues(g, 0.0), ConfigError);
  CHECK_THROWS_AS(filter_dominated_venues(g, 1.5), ConfigError);
}

TEST_CASE("property: composed filters leave only venues meeting both predicates") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const auto d = oracle::random_dense(rng, 2 + rng() % 8, 2 + rng() % 10, 0.4, 6);
    const auto g = oracle::to_graph(d);
    const auto f = filter_dominated_venues(filter_low_degree_venues(g, 4), 0.8);
    REQUIRE_NOTHROW(f.check_invariants());
    CHECK(f.n_users() == g.n_users());
    std::size_t expected = 0;
    for (std::size_t v = 0; v < d.venues(); ++v) {
      const auto w = d.venue_weight(v);
      std::uint32_t top = 0;
      for (std::size_t u = 0; u < d.users(); ++u) top = std::max(top, d.counts[u][v]);
      const bool keep = w >= 4 && static_cast<double>(top) < 0.8 * static_cast<double>(w);
      expected += keep;
      CHECK(f.find_venue(oracle::venue_name(v)).has_value() == keep);
    }
    CHECK(f.n_venues() == expected);
  }
}

TEST_CASE("user projection") {
  SUBCASE("toy") {
    const auto p = project_users(oracle::to_graph(oracle::toy()));
    REQUIRE(p.edges.size() == 2);
    CHECK(p.edges[0] == ProjectedEdge{user_at(0), user_at(1), 2});
    CHECK(p.edges[1] == ProjectedEdge{user_at(1), user_at(2), 1});
  }
  SUBCASE("no common venue, no edge") {
    const auto g = BipartiteGraph::from_checkins(visits({{"a", "x"}, {"b", "y"}}));
    CHECK(project_users(g).edges.empty());
  }
  SUBCASE("star gives a complete graph") {
    for (std::size_t k = 1; k <= 7; ++k) {
      oracle::Dense d;
      d.counts.assign(k, {1});
      const auto p = project_users(oracle::to_graph(d));
      std::vector<ProjectedEdge> expected;
      for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) expected.push_back({user_at(a), user_at(b), 1});
      }
      CHECK(p.edges == expected);
    }
  }
  SUBCASE("property: weights equal brute-force intersections") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 100; ++trial) {
      const auto d = oracle::random_dense(rng, 1 + rng() % 9, 1 + rng() % 9, 0.35);
      const auto p = project_users(oracle::to_graph(d));
      std::map<std::pair<std::size_t, std::size_t>, std::uint32_t> got;
      for (const auto& e : p.edges) got[{idx(e.a), idx(e.b)}] = e.weight;
      for (std::size_t a = 0; a < d.users(); ++a) {
        for (std::size_t b = a + 1; b < d.users(); ++b) {
          std::uint32_t common = 0;
          for (std::size_t v = 0; v < d.venues(); ++v) common += d.linked(a, v) && d.linked(b, v);
          auto it = got.find({a, b});
          CHECK((it == got.end() ? 0u : it->second) == common);
        }
      }
    }
  }
}

TEST_CASE("remove and restore") {
  std::vector<CheckIn> cs;
  for (int i = 0; i < 5; ++i) cs.push_back({"u1", "v1", "c", 0, 0, 10 - i});
  for (int i = 0; i < 3; ++i) cs.push_back({"u2", "v1", "c", 0, 0, i});
  cs.push_back({"u2", "v2", "c", 0, 0, 4});
  auto g = BipartiteGraph::from_checkins(cs);
  const auto original = g;

  auto rec = g.remove_pair(g.user("u1"), g.venue("v1"));
  CHECK(rec.times.size() == 5);
  CHECK(g.weighted_degree(g.venue("v1")) == 3);
  g.restore_pair(std::move(rec));
  CHECK(g == original);

  g.remove_pair(g.user("u2"), g.venue("v1"));
  CHECK(g.weighted_degree(g.venue("v1")) == 5);
  CHECK(g.binary_degree(g.venue("v1")) == 1);
  CHECK_THROWS_AS(g.remove_pair(g.user("u2"), g.venue("v1")), PairNotPresent);
}

TEST_CASE("property: remove then restore is the identity for every pair") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const auto d = oracle::random_dense(rng, 1 + rng() % 8, 1 + rng() % 8, 0.4);
    auto g = oracle::to_graph(d);
    const auto original = g;
    for (std::size_t u = 0; u < d.users(); ++u) {
      for (std::size_t v = 0; v < d.venues(); ++v) {
        if (!d.linked(u, v)) continue;
        auto rec = g.remove_pair(user_at(u), venue_at(v));
        REQUIRE_NOTHROW(g.check_invariants());
        CHECK(g.n_checkins() == original.n_checkins() - d.counts[u][v]);
        g.restore_pair(std::move(rec));
        CHECK(g == original);
      }
    }
  }
}

TEST_CASE("graph TSV round trip keeps every detail") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    const auto d = oracle::random_dense(rng, 1 + rng() % 8, 1 + rng() % 8, 0.4);
    auto g = oracle::to_graph(d);
    // isolated users and venues must survive too
    if (g.n_pairs() > 0) {
      const auto& first = g.venues_of(user_at(0)).front();
      g.remove_pair(user_at(0), first.venue);
    }
    std::stringstream s;
    write_graph_tsv(g, s);
    const auto back = read_graph_tsv(s);
    CHECK(back == g);
    CHECK(graph_checksum(back) == graph_checksum(g));
  }
}

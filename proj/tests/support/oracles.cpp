#include "oracles.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

namespace oracle {

std::size_t Dense::venue_degree(std::size_t v) const {
  std::size_t k = 0;
  for (std::size_t u = 0; u < users(); ++u) k += linked(u, v);
  return k;
}

std::size_t Dense::user_degree(std::size_t u) const {
  std::size_t k = 0;
  for (std::size_t v = 0; v < venues(); ++v) k += linked(u, v);
  return k;
}

std::size_t Dense::venue_weight(std::size_t v) const {
  std::size_t k = 0;
  for (std::size_t u = 0; u < users(); ++u) k += counts[u][v];
  return k;
}

std::size_t Dense::user_weight(std::size_t u) const {
  std::size_t k = 0;
  for (std::size_t v = 0; v < venues(); ++v) k += counts[u][v];
  return k;
}

std::string user_name(std::size_t u) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "u%04zu", u);
  return buf;
}

std::string venue_name(std::size_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "v%04zu", v);
  return buf;
}

std::vector<lbsn::CheckIn> to_checkins(const Dense& d) {
  std::vector<lbsn::CheckIn> out;
  for (std::size_t u = 0; u < d.users(); ++u) {
    for (std::size_t v = 0; v < d.venues(); ++v) {
      for (std::uint32_t k = 0; k < d.counts[u][v]; ++k) {
        out.push_back({user_name(u), venue_name(v), "c" + std::to_string(v % 3),
                       40.0 + 0.01 * static_cast<double>(v), -74.0 + 0.02 * static_cast<double>(v),
                       static_cast<lbsn::Timestamp>(1000 * u + 10 * v + k)});
      }
    }
  }
  return out;
}

lbsn::BipartiteGraph to_graph(const Dense& d) {
  auto g = lbsn::BipartiteGraph::from_checkins(to_checkins(d));
  // Venues/users without any check-in would not appear; tests only use
  // matrices where that is acceptable or pad explicitly.
  return g;
}

Dense random_dense(std::mt19937_64& rng, std::size_t users, std::size_t venues, double p,
                   std::uint32_t max_count) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<std::uint32_t> count(1, max_count);
  Dense d;
  d.counts.assign(users, std::vector<std::uint32_t>(venues, 0));
  for (auto& row : d.counts) {
    for (auto& c : row) {
      if (coin(rng) < p) c = count(rng);
    }
  }
  // every user and venue gets at least one link so the graph keeps all nodes
  for (std::size_t u = 0; u < users; ++u) {
    if (d.user_degree(u) == 0) d.counts[u][rng() % venues] = count(rng);
  }
  for (std::size_t v = 0; v < venues; ++v) {
    if (d.venue_degree(v) == 0) d.counts[rng() % users][v] = count(rng);
  }
  return d;
}

Dense toy() {
  Dense d;
  d.counts = {{1, 1, 0, 0}, {1, 1, 1, 0}, {0, 0, 1, 1}};
  return d;
}

namespace {

double share(const Dense& d, bool weighted, std::size_t u, std::size_t v, bool from_venue) {
  if (!d.linked(u, v)) return 0.0;
  if (from_venue) {
    return weighted ? static_cast<double>(d.counts[u][v]) / static_cast<double>(d.venue_weight(v))
                    : 1.0 / static_cast<double>(d.venue_degree(v));
  }
  return weighted ? static_cast<double>(d.counts[u][v]) / static_cast<double>(d.user_weight(u))
                  : 1.0 / static_cast<double>(d.user_degree(u));
}

std::vector<std::vector<double>> transfer(const Dense& d, bool weighted) {
  // W[i][j]: resource that venue j sends to venue i through all users
  std::vector<std::vector<double>> w(d.venues(), std::vector<double>(d.venues(), 0.0));
  for (std::size_t i = 0; i < d.venues(); ++i) {
    for (std::size_t j = 0; j < d.venues(); ++j) {
      for (std::size_t l = 0; l < d.users(); ++l) {
        w[i][j] += share(d, weighted, l, j, true) * share(d, weighted, l, i, false);
      }
    }
  }
  return w;
}

}  // namespace

std::vector<double> nbi(const Dense& d, std::size_t u, unsigned rounds, bool weighted) {
  const auto w = transfer(d, weighted);
  std::vector<double> f(d.venues());
  for (std::size_t v = 0; v < d.venues(); ++v) f[v] = d.linked(u, v) ? 1.0 : 0.0;
  for (unsigned r = 0; r < rounds; ++r) {
    std::vector<double> next(d.venues(), 0.0);
    for (std::size_t i = 0; i < d.venues(); ++i) {
      for (std::size_t j = 0; j < d.venues(); ++j) next[i] += w[i][j] * f[j];
    }
    f = next;
  }
  return f;
}

std::vector<double> nbi_us(const Dense& d, std::size_t u, double delta) {
  std::vector<double> users(d.users(), 0.0);
  for (std::size_t l = 0; l < d.users(); ++l) {
    for (std::size_t v = 0; v < d.venues(); ++v) {
      if (d.linked(u, v)) users[l] += share(d, false, l, v, true);
    }
  }
  double total = 0.0;
  for (std::size_t l = 0; l < d.users(); ++l) {
    if (l != u) total += adamic_adar(d, u, l);
  }
  if (total > 0.0) {
    for (std::size_t l = 0; l < d.users(); ++l) {
      if (l != u) users[l] += delta * adamic_adar(d, u, l) / total;
    }
  }
  std::vector<double> f(d.venues(), 0.0);
  for (std::size_t v = 0; v < d.venues(); ++v) {
    for (std::size_t l = 0; l < d.users(); ++l) f[v] += users[l] * share(d, false, l, v, false);
  }
  return f;
}

double adamic_adar(const Dense& d, std::size_t a, std::size_t b) {
  double s = 0.0;
  for (std::size_t v = 0; v < d.venues(); ++v) {
    if (d.linked(a, v) && d.linked(b, v)) {
      const auto k = d.venue_degree(v);
      if (k > 1) s += 1.0 / std::log(static_cast<double>(k));
    }
  }
  return s;
}

double cf(const Dense& d, std::size_t u, std::size_t v) {
  double num = 0.0, den = 0.0;
  for (std::size_t o = 0; o < d.users(); ++o) {
    if (o == u) continue;
    const double s = adamic_adar(d, u, o);
    den += s;
    if (d.linked(o, v)) num += s;
  }
  return den == 0.0 ? 0.0 : num / den;
}

AucTally auc(const std::vector<double>& pos, const std::vector<double>& neg) {
  std::uint64_t wins = 0, ties = 0;
  for (double p : pos) {
    for (double q : neg) {
      if (p > q) ++wins;
      else if (p == q) ++ties;
    }
  }
  const double n = static_cast<double>(pos.size()) * static_cast<double>(neg.size());
  return {(static_cast<double>(wins) + 0.5 * static_cast<double>(ties)) / n, wins, ties};
}

double haversine_km(double lat1, double lon1, double lat2, double lon2) {
  const double r = std::numbers::pi / 180.0;
  const double a = std::pow(std::sin((lat2 - lat1) * r / 2), 2) +
                   std::cos(lat1 * r) * std::cos(lat2 * r) * std::pow(std::sin((lon2 - lon1) * r / 2), 2);
  return 2 * 6371.0 * std::atan2(std::sqrt(a), std::sqrt(1 - a));
}

}  // namespace oracle

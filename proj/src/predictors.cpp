#include "lbsn/predictors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include "text.hpp"

namespace lbsn {

namespace {

constexpr double kEarthRadiusKm = 6371.0;

constexpr std::array<std::pair<Method, std::string_view>, 10> kMethodNames = {{
    {Method::grm, "grm"},
    {Method::assort, "assort"},
    {Method::cf, "cf"},
    {Method::nbi, "nbi"},
    {Method::nbi_mod, "nbi_mod"},
    {Method::nbi_us, "nbi_us"},
    {Method::nbi_multistep, "nbi_multistep"},
    {Method::nbi_time, "nbi_time"},
    {Method::loc_baseline, "loc_baseline"},
    {Method::type_baseline, "type_baseline"},
}};

void require_user(const BipartiteGraph& g, UserIndex u) {
  if (!g.contains(u)) throw UnknownNode("user index " + std::to_string(idx(u)) + " not in graph");
}

void require_venue(const BipartiteGraph& g, VenueIndex v) {
  if (!g.contains(v)) throw UnknownVenue("venue index " + std::to_string(idx(v)) + " not in graph");
}

void require_venues_of(const BipartiteGraph& g, UserIndex u) {
  require_user(g, u);
  if (g.binary_degree(u) == 0) throw IsolatedUser("user " + g.user_id(u) + " has no venues");
}

double adamic_adar_weight(std::size_t degree) {
  return degree > 1 ? 1.0 / std::log(static_cast<double>(degree)) : 0.0;
}

// Rounds of (venues -> users, users -> venues) starting from u's venues.
// `user_bonus`, when given, is added to the user resources after the first
// venues -> users half-step.
std::vector<double> run_flow(const BipartiteGraph& g, UserIndex u, Adjacency adjacency,
                             unsigned rounds, const std::vector<double>* user_bonus = nullptr) {
  const ResourceFlow flow(g, adjacency);
  auto venue_res = initial_resource(g, u);
  std::vector<double> user_res(g.n_users());
  for (unsigned r = 0; r < rounds; ++r) {
    flow.venues_to_users(venue_res, user_res);
    if (r == 0 && user_bonus) {
      for (std::size_t i = 0; i < user_res.size(); ++i) user_res[i] += (*user_bonus)[i];
    }
    flow.users_to_venues(user_res, venue_res);
  }
  return venue_res;
}

ScoreVector make_vector(UserIndex u, std::vector<double> scores, const PredictorConfig& config) {
  return ScoreVector{u, std::move(scores), config, false};
}

std::unordered_map<std::string_view, std::size_t> category_counts(const BipartiteGraph& g,
                                                                   UserIndex u) {
  std::unordered_map<std::string_view, std::size_t> counts;
  for (const auto& l : g.venues_of(u)) {
    const auto& cat = g.venue_meta(l.venue).category;
    if (!cat.empty()) counts[cat] += l.count();
  }
  return counts;
}

std::size_t max_venue_degree(const BipartiteGraph& g) {
  std::size_t m = 0;
  for (std::size_t v = 0; v < g.n_venues(); ++v) m = std::max(m, g.binary_degree(venue_at(v)));
  return m;
}

void check_nonnegative(double value, const char* name) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw ConfigError(std::string(name) + " must be a finite non-negative number");
  }
}

}  // namespace

std::string_view method_name(Method m) {
  for (const auto& [method, name] : kMethodNames) {
    if (method == m) return name;
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
  for (const auto& [method, n] : kMethodNames) {
    if (n == name) return method;
  }
  return std::nullopt;
}

std::span<const Method> all_methods() {
  static constexpr std::array<Method, 10> methods = {
      Method::grm,     Method::assort,        Method::cf,       Method::nbi,
      Method::nbi_mod, Method::nbi_us,        Method::nbi_multistep,
      Method::nbi_time, Method::loc_baseline, Method::type_baseline};
  return methods;
}

void PredictorConfig::validate() const {
  if (steps < 1) throw ConfigError("steps must be >= 1");
  check_nonnegative(alpha, "alpha");
  check_nonnegative(beta, "beta");
  check_nonnegative(gamma, "gamma");
  check_nonnegative(delta, "delta");
  check_nonnegative(epsilon, "epsilon");
  if (!(d0_km > 0.0) || !std::isfinite(d0_km)) throw ConfigError("d0 must be positive");
  if (!(tau_seconds > 0.0) || !std::isfinite(tau_seconds)) {
    throw ConfigError("tau must be positive");
  }
}

std::string PredictorConfig::label() const {
  const PredictorConfig def;
  std::vector<std::string> params;
  if (adjacency != def.adjacency) params.push_back("adjacency=weighted");
  if (steps != def.steps) params.push_back("steps=" + std::to_string(steps));
  auto num = [&](const char* name, double value, double fallback) {
    if (value != fallback) params.push_back(std::string(name) + "=" + detail::format_double(value));
  };
  num("alpha", alpha, def.alpha);
  num("beta", beta, def.beta);
  num("gamma", gamma, def.gamma);
  num("delta", delta, def.delta);
  num("epsilon", epsilon, def.epsilon);
  num("d0", d0_km, def.d0_km);
  num("tau", tau_seconds, def.tau_seconds);

  std::string out(method_name(method));
  if (params.empty()) return out;
  out += '(';
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i) out += ',';
    out += params[i];
  }
  out += ')';
  return out;
}

PredictorConfig PredictorConfig::parse(std::string_view text) {
  text = detail::trim(text);
  PredictorConfig cfg;
  const auto open = text.find('(');
  const auto name = detail::trim(text.substr(0, open));
  auto method = parse_method(name);
  if (!method) throw ConfigError("unknown method '" + std::string(name) + "'");
  cfg.method = *method;
  if (open != std::string_view::npos) {
    if (text.back() != ')') throw ConfigError("unbalanced parentheses in '" + std::string(text) + "'");
    const auto body = text.substr(open + 1, text.size() - open - 2);
    for (auto item : detail::split(body, ',')) {
      item = detail::trim(item);
      if (item.empty()) continue;
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) {
        throw ConfigError("expected key=value in '" + std::string(item) + "'");
      }
      const auto key = detail::trim(item.substr(0, eq));
      const auto value = detail::trim(item.substr(eq + 1));
      if (key == "adjacency") {
        if (value == "binary") cfg.adjacency = Adjacency::binary;
        else if (value == "weighted") cfg.adjacency = Adjacency::weighted;
        else throw ConfigError("adjacency must be binary or weighted");
        continue;
      }
      if (key == "steps") {
        if (!detail::parse_integer(value, cfg.steps)) throw ConfigError("bad steps value");
        continue;
      }
      double x = 0.0;
      if (!detail::parse_double(value, x)) {
        throw ConfigError("bad value for " + std::string(key));
      }
      if (key == "alpha") cfg.alpha = x;
      else if (key == "beta") cfg.beta = x;
      else if (key == "gamma") cfg.gamma = x;
      else if (key == "delta") cfg.delta = x;
      else if (key == "epsilon") cfg.epsilon = x;
      else if (key == "d0") cfg.d0_km = x;
      else if (key == "tau") cfg.tau_seconds = x;
      else throw ConfigError("unknown predictor parameter '" + std::string(key) + "'");
    }
  }
  cfg.validate();
  return cfg;
}

double haversine_km(GeoPoint a, GeoPoint b) {
  constexpr double rad = std::numbers::pi / 180.0;
  const double dlat = (b.latitude - a.latitude) * rad;
  const double dlon = (b.longitude - a.longitude) * rad;
  const double h = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(a.latitude * rad) * std::cos(b.latitude * rad) *
                       std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

std::optional<GeoPoint> mean_location(const BipartiteGraph& g, UserIndex u) {
  require_user(g, u);
  double lat = 0.0, lon = 0.0;
  std::size_t n = 0;
  for (const auto& l : g.venues_of(u)) {
    const auto& loc = g.venue_meta(l.venue).location;
    if (!loc) continue;
    lat += loc->latitude * l.count();
    lon += loc->longitude * l.count();
    n += l.count();
  }
  if (n == 0) return std::nullopt;
  return GeoPoint{lat / static_cast<double>(n), lon / static_cast<double>(n)};
}

double type_fraction(const BipartiteGraph& g, UserIndex u, std::string_view category) {
  require_user(g, u);
  const auto total = g.weighted_degree(u);
  if (total == 0) return 0.0;
  std::size_t same = 0;
  for (const auto& l : g.venues_of(u)) {
    if (g.venue_meta(l.venue).category == category) same += l.count();
  }
  return static_cast<double>(same) / static_cast<double>(total);
}

double mean_venue_degree(const BipartiteGraph& g, UserIndex u) {
  require_user(g, u);
  const auto links = g.venues_of(u);
  if (links.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& l : links) sum += static_cast<double>(g.binary_degree(l.venue));
  return sum / static_cast<double>(links.size());
}

double score_grm(const BipartiteGraph& g, VenueIndex v) {
  require_venue(g, v);
  return static_cast<double>(g.binary_degree(v));
}

double score_assortativity(const BipartiteGraph& g, UserIndex u, VenueIndex v) {
  require_venue(g, v);
  require_user(g, u);
  if (g.binary_degree(u) == 0) return 0.0;
  return -std::abs(mean_venue_degree(g, u) - static_cast<double>(g.binary_degree(v)));
}

double user_similarity_aa(const BipartiteGraph& g, UserIndex a, UserIndex b) {
  require_user(g, a);
  require_user(g, b);
  if (a == b) throw Error("similarity of a user with itself is undefined");
  const auto la = g.venues_of(a);
  const auto lb = g.venues_of(b);
  double sim = 0.0;
  auto ia = la.begin();
  auto ib = lb.begin();
  while (ia != la.end() && ib != lb.end()) {
    if (ia->venue < ib->venue) {
      ++ia;
    } else if (ib->venue < ia->venue) {
      ++ib;
    } else {
      sim += adamic_adar_weight(g.binary_degree(ia->venue));
      ++ia;
      ++ib;
    }
  }
  return sim;
}

std::vector<double> similarity_row(const BipartiteGraph& g, UserIndex u) {
  require_user(g, u);
  std::vector<double> row(g.n_users(), 0.0);
  for (const auto& l : g.venues_of(u)) {
    const auto w = adamic_adar_weight(g.binary_degree(l.venue));
    if (w == 0.0) continue;
    for (const auto& ul : g.users_of(l.venue)) {
      if (ul.user != u) row[idx(ul.user)] += w;
    }
  }
  return row;
}

double score_cf(const BipartiteGraph& g, UserIndex u, VenueIndex v) {
  require_venue(g, v);
  const auto sims = similarity_row(g, u);
  double total = 0.0;
  for (double s : sims) total += s;
  if (total == 0.0) return 0.0;
  double num = 0.0;
  for (const auto& ul : g.users_of(v)) {
    if (ul.user != u) num += sims[idx(ul.user)];
  }
  return num / total;
}

double score_loc_baseline(const BipartiteGraph& g, UserIndex u, VenueIndex v) {
  require_venue(g, v);
  const auto center = mean_location(g, u);
  const auto& loc = g.venue_meta(v).location;
  if (!loc) throw MissingVenueMeta("venue " + g.venue_id(v) + " has no location");
  if (!center) throw MissingVenueMeta("user " + g.user_id(u) + " has no located check-ins");
  return -haversine_km(*center, *loc);
}

double score_type_baseline(const BipartiteGraph& g, UserIndex u, VenueIndex v) {
  require_venue(g, v);
  const auto& cat = g.venue_meta(v).category;
  if (cat.empty()) throw MissingVenueMeta("venue " + g.venue_id(v) + " has no category");
  return type_fraction(g, u, cat);
}

void ResourceFlow::venues_to_users(std::span<const double> venue_res,
                                   std::span<double> user_res) const {
  std::fill(user_res.begin(), user_res.end(), 0.0);
  for (std::size_t v = 0; v < venue_res.size(); ++v) {
    const double r = venue_res[v];
    if (r == 0.0) continue;
    const auto links = g_.users_of(venue_at(v));
    if (links.empty()) continue;
    if (adjacency_ == Adjacency::binary) {
      const double share = r / static_cast<double>(links.size());
      for (const auto& l : links) user_res[idx(l.user)] += share;
    } else {
      const double unit = r / static_cast<double>(g_.weighted_degree(venue_at(v)));
      for (const auto& l : links) user_res[idx(l.user)] += unit * l.count;
    }
  }
}

void ResourceFlow::users_to_venues(std::span<const double> user_res,
                                   std::span<double> venue_res) const {
  std::fill(venue_res.begin(), venue_res.end(), 0.0);
  for (std::size_t u = 0; u < user_res.size(); ++u) {
    const double r = user_res[u];
    if (r == 0.0) continue;
    const auto links = g_.venues_of(user_at(u));
    if (links.empty()) continue;
    if (adjacency_ == Adjacency::binary) {
      const double share = r / static_cast<double>(links.size());
      for (const auto& l : links) venue_res[idx(l.venue)] += share;
    } else {
      const double unit = r / static_cast<double>(g_.weighted_degree(user_at(u)));
      for (const auto& l : links) venue_res[idx(l.venue)] += unit * l.count();
    }
  }
}

std::vector<double> initial_resource(const BipartiteGraph& g, UserIndex u) {
  require_user(g, u);
  std::vector<double> res(g.n_venues(), 0.0);
  for (const auto& l : g.venues_of(u)) res[idx(l.venue)] = 1.0;
  return res;
}

ScoreVector score_nbi(const BipartiteGraph& g, UserIndex u, const PredictorConfig& config) {
  require_venues_of(g, u);
  return make_vector(u, run_flow(g, u, config.adjacency, 1), config);
}

ScoreVector score_nbi_multistep(const BipartiteGraph& g, UserIndex u,
                                const PredictorConfig& config) {
  require_venues_of(g, u);
  if (config.steps < 1) throw ConfigError("steps must be >= 1");
  return make_vector(u, run_flow(g, u, config.adjacency, config.steps), config);
}

ScoreVector score_nbi_us(const BipartiteGraph& g, UserIndex u, const PredictorConfig& config) {
  require_venues_of(g, u);
  if (config.delta == 0.0) return make_vector(u, run_flow(g, u, config.adjacency, 1), config);
  auto bonus = similarity_row(g, u);
  double total = 0.0;
  for (double s : bonus) total += s;
  if (total == 0.0) return make_vector(u, run_flow(g, u, config.adjacency, 1), config);
  for (auto& s : bonus) s = config.delta * s / total;
  return make_vector(u, run_flow(g, u, config.adjacency, 1, &bonus), config);
}

ScoreVector score_nbi_mod(const BipartiteGraph& g, UserIndex u, const PredictorConfig& config) {
  require_venues_of(g, u);
  auto scores = run_flow(g, u, config.adjacency, 1);

  const auto counts = category_counts(g, u);
  const auto total = static_cast<double>(g.weighted_degree(u));
  const auto center = mean_location(g, u);
  const auto max_deg = static_cast<double>(max_venue_degree(g));

  for (std::size_t v = 0; v < scores.size(); ++v) {
    if (scores[v] == 0.0) continue;
    const auto& meta = g.venue_meta(venue_at(v));
    double type_factor = 1.0;
    if (!meta.category.empty()) {
      const auto it = counts.find(meta.category);
      const double frac = it == counts.end() ? 0.0 : static_cast<double>(it->second) / total;
      type_factor = 1.0 + config.alpha * frac;
    }
    double loc_factor = 1.0;
    if (meta.location && center) {
      loc_factor = 1.0 + config.beta * std::exp(-haversine_km(*center, *meta.location) / config.d0_km);
    }
    const double deg_norm =
        max_deg > 0.0 ? static_cast<double>(g.binary_degree(venue_at(v))) / max_deg : 0.0;
    const double deg_factor = 1.0 + config.gamma * deg_norm;
    scores[v] = scores[v] * type_factor * loc_factor * deg_factor;
  }
  return make_vector(u, std::move(scores), config);
}

std::vector<double> venue_trendiness(const BipartiteGraph& g, TimeWindow window,
                                     double tau_seconds) {
  const auto tau = static_cast<Timestamp>(std::llround(tau_seconds));
  const Timestamp lo = window.start - tau;
  const Timestamp hi = window.end + tau;
  std::vector<double> near(g.n_venues(), 0.0);
  for (std::size_t u = 0; u < g.n_users(); ++u) {
    for (const auto& l : g.venues_of(user_at(u))) {
      const auto first = std::lower_bound(l.times.begin(), l.times.end(), lo);
      const auto last = std::lower_bound(first, l.times.end(), hi);
      near[idx(l.venue)] += static_cast<double>(last - first);
    }
  }
  for (std::size_t v = 0; v < near.size(); ++v) {
    const auto total = g.weighted_degree(venue_at(v));
    near[v] = total == 0 ? 0.0 : near[v] / static_cast<double>(total);
  }
  return near;
}

ScoreVector score_nbi_time(const BipartiteGraph& g, UserIndex u, TimeWindow window,
                           const PredictorConfig& config) {
  require_venues_of(g, u);
  auto scores = run_flow(g, u, config.adjacency, 1);
  const auto trend = venue_trendiness(g, window, config.tau_seconds);
  for (std::size_t v = 0; v < scores.size(); ++v) {
    scores[v] = scores[v] * (1.0 + config.epsilon * trend[v]);
  }
  return make_vector(u, std::move(scores), config);
}

ScoreVector score_user(const BipartiteGraph& g, UserIndex u, const PredictorConfig& config,
                       const ScoringContext& context) {
  require_user(g, u);
  const bool isolated = g.binary_degree(u) == 0;
  if (config.method == Method::grm) {
    std::vector<double> scores(g.n_venues());
    for (std::size_t v = 0; v < scores.size(); ++v) {
      scores[v] = static_cast<double>(g.binary_degree(venue_at(v)));
    }
    return ScoreVector{u, std::move(scores), config, isolated};
  }
  if (isolated) return ScoreVector{u, std::vector<double>(g.n_venues(), 0.0), config, true};

  switch (config.method) {
    case Method::grm:
      break;
    case Method::assort: {
      const double mean = mean_venue_degree(g, u);
      std::vector<double> scores(g.n_venues());
      for (std::size_t v = 0; v < scores.size(); ++v) {
        scores[v] = -std::abs(mean - static_cast<double>(g.binary_degree(venue_at(v))));
      }
      return make_vector(u, std::move(scores), config);
    }
    case Method::cf: {
      const auto sims = similarity_row(g, u);
      double total = 0.0;
      for (double s : sims) total += s;
      std::vector<double> scores(g.n_venues(), 0.0);
      if (total == 0.0) return make_vector(u, std::move(scores), config);
      for (std::size_t other = 0; other < sims.size(); ++other) {
        if (sims[other] == 0.0) continue;
        for (const auto& l : g.venues_of(user_at(other))) scores[idx(l.venue)] += sims[other];
      }
      for (auto& s : scores) s /= total;
      return make_vector(u, std::move(scores), config);
    }
    case Method::nbi:
      return score_nbi(g, u, config);
    case Method::nbi_mod:
      return score_nbi_mod(g, u, config);
    case Method::nbi_us:
      return score_nbi_us(g, u, config);
    case Method::nbi_multistep:
      return score_nbi_multistep(g, u, config);
    case Method::nbi_time:
      if (!context.window) throw ConfigError("nbi_time needs a time window sample");
      return score_nbi_time(g, u, *context.window, config);
    case Method::loc_baseline: {
      const auto center = mean_location(g, u);
      std::vector<double> scores(g.n_venues(), 0.0);
      if (!center) return make_vector(u, std::move(scores), config);
      // Venues without coordinates rank as if at the antipode.
      const double farthest = std::numbers::pi * kEarthRadiusKm;
      for (std::size_t v = 0; v < scores.size(); ++v) {
        const auto& loc = g.venue_meta(venue_at(v)).location;
        scores[v] = loc ? -haversine_km(*center, *loc) : -farthest;
      }
      return make_vector(u, std::move(scores), config);
    }
    case Method::type_baseline: {
      const auto counts = category_counts(g, u);
      const auto total = static_cast<double>(g.weighted_degree(u));
      std::vector<double> scores(g.n_venues(), 0.0);
      for (std::size_t v = 0; v < scores.size(); ++v) {
        const auto it = counts.find(g.venue_meta(venue_at(v)).category);
        if (it != counts.end()) scores[v] = static_cast<double>(it->second) / total;
      }
      return make_vector(u, std::move(scores), config);
    }
  }
  throw ConfigError("unhandled method");
}

}  // namespace lbsn

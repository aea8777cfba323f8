#include "lbsn/graph.hpp"

#include <algorithm>
#include <numeric>

namespace lbsn {

namespace {

std::vector<std::size_t> sorted_order(const std::vector<std::string>& ids) {
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
  return order;
}

template <typename Link, typename Index>
auto find_link(std::vector<Link>& links, Index key, Index Link::*field) {
  return std::lower_bound(links.begin(), links.end(), key,
                          [field](const Link& l, Index k) { return l.*field < k; });
}

}  // namespace

BipartiteGraph BipartiteGraph::from_checkins(std::span<const CheckIn> checkins) {
  GraphParts parts;
  std::unordered_map<std::string_view, std::size_t> users, venues;
  std::unordered_map<std::uint64_t, std::size_t> edge_of;
  for (const auto& c : checkins) {
    auto [uit, new_user] = users.try_emplace(c.user_id, parts.user_ids.size());
    if (new_user) parts.user_ids.push_back(c.user_id);
    auto [vit, new_venue] = venues.try_emplace(c.venue_id, parts.venue_ids.size());
    if (new_venue) {
      parts.venue_ids.push_back(c.venue_id);
      parts.venue_meta.emplace_back();
    }
    // last check-in seen wins
    parts.venue_meta[vit->second] =
        VenueMeta{c.category, GeoPoint{c.latitude, c.longitude}};
    const auto key = (static_cast<std::uint64_t>(uit->second) << 32) | vit->second;
    auto [eit, new_edge] = edge_of.try_emplace(key, parts.edges.size());
    if (new_edge) parts.edges.push_back({uit->second, vit->second, {}});
    parts.edges[eit->second].times.push_back(c.timestamp);
  }
  return from_parts(std::move(parts));
}

BipartiteGraph BipartiteGraph::from_parts(GraphParts parts) {
  if (parts.venue_meta.size() != parts.venue_ids.size()) {
    throw Error("venue metadata does not match venue list");
  }
  BipartiteGraph g;
  const auto user_order = sorted_order(parts.user_ids);
  const auto venue_order = sorted_order(parts.venue_ids);
  std::vector<std::size_t> user_rank(user_order.size()), venue_rank(venue_order.size());

  g.user_ids_.reserve(user_order.size());
  for (std::size_t r = 0; r < user_order.size(); ++r) {
    user_rank[user_order[r]] = r;
    auto& id = parts.user_ids[user_order[r]];
    if (!g.user_ids_.empty() && g.user_ids_.back() == id) throw Error("duplicate user id " + id);
    g.user_index_.emplace(id, user_at(r));
    g.user_ids_.push_back(std::move(id));
  }
  g.venue_ids_.reserve(venue_order.size());
  for (std::size_t r = 0; r < venue_order.size(); ++r) {
    venue_rank[venue_order[r]] = r;
    auto& id = parts.venue_ids[venue_order[r]];
    if (!g.venue_ids_.empty() && g.venue_ids_.back() == id) {
      throw Error("duplicate venue id " + id);
    }
    g.venue_index_.emplace(id, venue_at(r));
    g.venue_ids_.push_back(std::move(id));
    g.venue_meta_.push_back(std::move(parts.venue_meta[venue_order[r]]));
  }

  g.user_adj_.resize(g.n_users());
  g.venue_adj_.resize(g.n_venues());
  g.user_wdeg_.assign(g.n_users(), 0);
  g.venue_wdeg_.assign(g.n_venues(), 0);
  for (auto& e : parts.edges) {
    if (e.user >= g.n_users() || e.venue >= g.n_venues()) throw Error("edge endpoint out of range");
    if (e.times.empty()) throw Error("edge without check-ins");
    std::sort(e.times.begin(), e.times.end());
    g.user_adj_[user_rank[e.user]].push_back({venue_at(venue_rank[e.venue]), std::move(e.times)});
  }
  for (std::size_t u = 0; u < g.n_users(); ++u) {
    auto& links = g.user_adj_[u];
    std::sort(links.begin(), links.end(),
              [](const VenueLink& a, const VenueLink& b) { return a.venue < b.venue; });
    for (std::size_t i = 0; i < links.size(); ++i) {
      if (i > 0 && links[i - 1].venue == links[i].venue) {
        throw Error("duplicate pair (" + g.user_ids_[u] + ", " +
                    g.venue_ids_[idx(links[i].venue)] + ")");
      }
      const auto c = links[i].count();
      g.venue_adj_[idx(links[i].venue)].push_back({user_at(u), c});
      g.user_wdeg_[u] += c;
      g.venue_wdeg_[idx(links[i].venue)] += c;
      g.n_checkins_ += c;
    }
    g.n_pairs_ += links.size();
  }
  return g;
}

std::optional<UserIndex> BipartiteGraph::find_user(std::string_view id) const {
  auto it = user_index_.find(std::string(id));
  if (it == user_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<VenueIndex> BipartiteGraph::find_venue(std::string_view id) const {
  auto it = venue_index_.find(std::string(id));
  if (it == venue_index_.end()) return std::nullopt;
  return it->second;
}

UserIndex BipartiteGraph::user(std::string_view id) const {
  if (auto u = find_user(id)) return *u;
  throw UnknownNode("unknown user " + std::string(id));
}

VenueIndex BipartiteGraph::venue(std::string_view id) const {
  if (auto v = find_venue(id)) return *v;
  throw UnknownNode("unknown venue " + std::string(id));
}

const VenueLink* BipartiteGraph::link(UserIndex u, VenueIndex v) const {
  if (!contains(u)) return nullptr;
  const auto& links = user_adj_[idx(u)];
  auto it = std::lower_bound(links.begin(), links.end(), v,
                             [](const VenueLink& l, VenueIndex k) { return l.venue < k; });
  if (it == links.end() || it->venue != v) return nullptr;
  return &*it;
}

std::uint32_t BipartiteGraph::pair_count(UserIndex u, VenueIndex v) const {
  const auto* l = link(u, v);
  return l ? l->count() : 0;
}

RemovalRecord BipartiteGraph::remove_pair(UserIndex u, VenueIndex v) {
  if (!contains(u) || !contains(v)) throw PairNotPresent("pair endpoint not in graph");
  auto& ulinks = user_adj_[idx(u)];
  auto uit = find_link(ulinks, v, &VenueLink::venue);
  if (uit == ulinks.end() || uit->venue != v) {
    throw PairNotPresent("no check-ins between " + user_ids_[idx(u)] + " and " +
                         venue_ids_[idx(v)]);
  }
  auto& vlinks = venue_adj_[idx(v)];
  auto vit = find_link(vlinks, u, &UserLink::user);

  RemovalRecord record{u, v, std::move(uit->times)};
  const auto c = record.times.size();
  ulinks.erase(uit);
  vlinks.erase(vit);
  user_wdeg_[idx(u)] -= c;
  venue_wdeg_[idx(v)] -= c;
  n_checkins_ -= c;
  --n_pairs_;
  return record;
}

void BipartiteGraph::restore_pair(RemovalRecord record) {
  const auto u = record.user;
  const auto v = record.venue;
  if (!contains(u) || !contains(v) || record.times.empty()) {
    throw Error("removal record does not belong to this graph");
  }
  auto& ulinks = user_adj_[idx(u)];
  auto uit = find_link(ulinks, v, &VenueLink::venue);
  if (uit != ulinks.end() && uit->venue == v) throw Error("pair already present");
  auto& vlinks = venue_adj_[idx(v)];
  auto vit = find_link(vlinks, u, &UserLink::user);

  const auto c = record.times.size();
  vlinks.insert(vit, UserLink{u, static_cast<std::uint32_t>(c)});
  ulinks.insert(uit, VenueLink{v, std::move(record.times)});
  user_wdeg_[idx(u)] += c;
  venue_wdeg_[idx(v)] += c;
  n_checkins_ += c;
  ++n_pairs_;
}

void BipartiteGraph::check_invariants() const {
  if (user_adj_.size() != n_users() || venue_adj_.size() != n_venues() ||
      venue_meta_.size() != n_venues() || user_index_.size() != n_users() ||
      venue_index_.size() != n_venues()) {
    throw Error("index tables disagree in size");
  }
  std::size_t pairs = 0, checkins = 0;
  std::vector<std::size_t> venue_seen(n_venues(), 0);
  for (std::size_t u = 0; u < n_users(); ++u) {
    if (u > 0 && !(user_ids_[u - 1] < user_ids_[u])) throw Error("user ids not sorted");
    std::size_t wdeg = 0;
    const auto& links = user_adj_[u];
    for (std::size_t i = 0; i < links.size(); ++i) {
      const auto& l = links[i];
      if (i > 0 && !(links[i - 1].venue < l.venue)) throw Error("user adjacency not sorted");
      if (l.times.empty()) throw Error("pair with zero check-ins");
      if (!std::is_sorted(l.times.begin(), l.times.end())) throw Error("times not sorted");
      if (!contains(l.venue)) throw Error("venue index out of range");
      const auto& vlinks = venue_adj_[idx(l.venue)];
      auto it = std::lower_bound(vlinks.begin(), vlinks.end(), user_at(u),
                                 [](const UserLink& x, UserIndex k) { return x.user < k; });
      if (it == vlinks.end() || it->user != user_at(u) || it->count != l.count()) {
        throw Error("adjacency lists are not transposes");
      }
      ++venue_seen[idx(l.venue)];
      wdeg += l.count();
    }
    if (wdeg != user_wdeg_[u]) throw Error("user weighted degree stale");
    pairs += links.size();
    checkins += wdeg;
  }
  for (std::size_t v = 0; v < n_venues(); ++v) {
    if (v > 0 && !(venue_ids_[v - 1] < venue_ids_[v])) throw Error("venue ids not sorted");
    const auto& vlinks = venue_adj_[v];
    if (vlinks.size() != venue_seen[v]) throw Error("venue adjacency has extra links");
    std::size_t wdeg = 0;
    for (const auto& l : vlinks) wdeg += l.count;
    if (wdeg != venue_wdeg_[v]) throw Error("venue weighted degree stale");
  }
  if (pairs != n_pairs_ || checkins != n_checkins_) throw Error("totals stale");
}

BipartiteGraph select_venues(const BipartiteGraph& g, const std::vector<bool>& keep) {
  if (keep.size() != g.n_venues()) throw Error("venue mask has wrong size");
  GraphParts parts;
  std::vector<std::size_t> remap(g.n_venues(), 0);
  for (std::size_t v = 0; v < g.n_venues(); ++v) {
    if (!keep[v]) continue;
    remap[v] = parts.venue_ids.size();
    parts.venue_ids.push_back(g.venue_id(venue_at(v)));
    parts.venue_meta.push_back(g.venue_meta(venue_at(v)));
  }
  for (std::size_t u = 0; u < g.n_users(); ++u) {
    parts.user_ids.push_back(g.user_id(user_at(u)));
    for (const auto& l : g.venues_of(user_at(u))) {
      if (keep[idx(l.venue)]) parts.edges.push_back({u, remap[idx(l.venue)], l.times});
    }
  }
  return BipartiteGraph::from_parts(std::move(parts));
}

BipartiteGraph filter_low_degree_venues(const BipartiteGraph& g, std::size_t min_degree,
                                        DegreeMeasure measure) {
  std::vector<bool> keep(g.n_venues());
  for (std::size_t v = 0; v < g.n_venues(); ++v) {
    const auto deg = measure == DegreeMeasure::weighted ? g.weighted_degree(venue_at(v))
                                                        : g.binary_degree(venue_at(v));
    keep[v] = deg >= min_degree;
  }
  return select_venues(g, keep);
}

BipartiteGraph filter_dominated_venues(const BipartiteGraph& g, double dominance) {
  if (!(dominance > 0.0 && dominance <= 1.0)) {
    throw ConfigError("dominance must lie in (0, 1]");
  }
  std::vector<bool> keep(g.n_venues(), true);
  for (std::size_t v = 0; v < g.n_venues(); ++v) {
    const auto total = g.weighted_degree(venue_at(v));
    if (total == 0) continue;
    std::uint32_t top = 0;
    for (const auto& l : g.users_of(venue_at(v))) top = std::max(top, l.count);
    keep[v] = static_cast<double>(top) / static_cast<double>(total) < dominance;
  }
  return select_venues(g, keep);
}

UserProjection project_users(const BipartiteGraph& g) {
  UserProjection p;
  p.n_users = g.n_users();
  std::vector<std::uint32_t> common(g.n_users(), 0);
  std::vector<std::size_t> touched;
  for (std::size_t a = 0; a < g.n_users(); ++a) {
    for (const auto& vl : g.venues_of(user_at(a))) {
      for (const auto& ul : g.users_of(vl.venue)) {
        const auto b = idx(ul.user);
        if (b <= a) continue;
        if (common[b]++ == 0) touched.push_back(b);
      }
    }
    std::sort(touched.begin(), touched.end());
    for (auto b : touched) {
      p.edges.push_back({user_at(a), user_at(b), common[b]});
      common[b] = 0;
    }
    touched.clear();
  }
  return p;
}

}  // namespace lbsn

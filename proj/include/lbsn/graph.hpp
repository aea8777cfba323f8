#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lbsn/checkin.hpp"
#include "lbsn/error.hpp"

namespace lbsn {

enum class UserIndex : std::uint32_t {};
enum class VenueIndex : std::uint32_t {};

constexpr std::size_t idx(UserIndex u) noexcept { return static_cast<std::size_t>(u); }
constexpr std::size_t idx(VenueIndex v) noexcept { return static_cast<std::size_t>(v); }
constexpr UserIndex user_at(std::size_t i) noexcept { return static_cast<UserIndex>(i); }
constexpr VenueIndex venue_at(std::size_t i) noexcept { return static_cast<VenueIndex>(i); }

struct GeoPoint {
  double latitude = 0.0;
  double longitude = 0.0;

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

struct VenueMeta {
  std::string category;  // empty when unknown
  std::optional<GeoPoint> location;

  friend bool operator==(const VenueMeta&, const VenueMeta&) = default;
};

/// A user's link to one venue; one timestamp per check-in, ascending.
struct VenueLink {
  VenueIndex venue{};
  std::vector<Timestamp> times;

  std::uint32_t count() const noexcept { return static_cast<std::uint32_t>(times.size()); }
  friend bool operator==(const VenueLink&, const VenueLink&) = default;
};

/// A venue's link to one user.
struct UserLink {
  UserIndex user{};
  std::uint32_t count = 0;

  friend bool operator==(const UserLink&, const UserLink&) = default;
};

class PairNotPresent : public Error {
 public:
  using Error::Error;
};

class UnknownNode : public Error {
 public:
  using Error::Error;
};

/// Everything needed to undo remove_pair.
struct RemovalRecord {
  UserIndex user{};
  VenueIndex venue{};
  std::vector<Timestamp> times;
};

/// Raw node/edge lists used to assemble a graph. Users and venues are
/// addressed by position in `user_ids` / `venue_ids`.
struct GraphParts {
  struct Edge {
    std::size_t user = 0;
    std::size_t venue = 0;
    std::vector<Timestamp> times;
  };
  std::vector<std::string> user_ids;
  std::vector<std::string> venue_ids;
  std::vector<VenueMeta> venue_meta;  // parallel to venue_ids
  std::vector<Edge> edges;            // (user, venue) unique, times non-empty
};

/// User-venue multigraph. Node indexes are dense and follow the lexicographic
/// order of the string ids, so any two graphs holding the same ids index them
/// identically. Many readers or one writer.
class BipartiteGraph {
 public:
  BipartiteGraph() = default;

  static BipartiteGraph from_checkins(std::span<const CheckIn> checkins);
  /// Throws Error on duplicate ids, duplicate pairs or empty time lists.
  static BipartiteGraph from_parts(GraphParts parts);

  std::size_t n_users() const noexcept { return user_ids_.size(); }
  std::size_t n_venues() const noexcept { return venue_ids_.size(); }
  /// Distinct connected user-venue pairs.
  std::size_t n_pairs() const noexcept { return n_pairs_; }
  std::size_t n_checkins() const noexcept { return n_checkins_; }

  const std::string& user_id(UserIndex u) const { return user_ids_.at(idx(u)); }
  const std::string& venue_id(VenueIndex v) const { return venue_ids_.at(idx(v)); }
  std::optional<UserIndex> find_user(std::string_view id) const;
  std::optional<VenueIndex> find_venue(std::string_view id) const;
  UserIndex user(std::string_view id) const;    // throws UnknownNode
  VenueIndex venue(std::string_view id) const;  // throws UnknownNode

  /// Sorted by venue index.
  std::span<const VenueLink> venues_of(UserIndex u) const { return user_adj_[idx(u)]; }
  /// Sorted by user index.
  std::span<const UserLink> users_of(VenueIndex v) const { return venue_adj_[idx(v)]; }

  std::size_t binary_degree(UserIndex u) const { return user_adj_[idx(u)].size(); }
  std::size_t binary_degree(VenueIndex v) const { return venue_adj_[idx(v)].size(); }
  std::size_t weighted_degree(UserIndex u) const { return user_wdeg_[idx(u)]; }
  std::size_t weighted_degree(VenueIndex v) const { return venue_wdeg_[idx(v)]; }

  /// 0 when the pair is not connected.
  std::uint32_t pair_count(UserIndex u, VenueIndex v) const;
  /// nullptr when the pair is not connected.
  const VenueLink* link(UserIndex u, VenueIndex v) const;
  bool connected(UserIndex u, VenueIndex v) const { return link(u, v) != nullptr; }

  const VenueMeta& venue_meta(VenueIndex v) const { return venue_meta_.at(idx(v)); }

  bool contains(UserIndex u) const noexcept { return idx(u) < n_users(); }
  bool contains(VenueIndex v) const noexcept { return idx(v) < n_venues(); }

  /// Deletes every check-in between u and v. Throws PairNotPresent.
  RemovalRecord remove_pair(UserIndex u, VenueIndex v);
  /// Inverse of remove_pair. Throws Error if the record does not fit this graph.
  void restore_pair(RemovalRecord record);

  /// Checks every structural invariant; throws Error describing the first
  /// violation. Used by tests and after loading cached graphs.
  void check_invariants() const;

  friend bool operator==(const BipartiteGraph&, const BipartiteGraph&) = default;

 private:
  std::vector<std::string> user_ids_;
  std::vector<std::string> venue_ids_;
  std::unordered_map<std::string, UserIndex> user_index_;
  std::unordered_map<std::string, VenueIndex> venue_index_;
  std::vector<VenueMeta> venue_meta_;
  std::vector<std::vector<VenueLink>> user_adj_;
  std::vector<std::vector<UserLink>> venue_adj_;
  std::vector<std::size_t> user_wdeg_;
  std::vector<std::size_t> venue_wdeg_;
  std::size_t n_pairs_ = 0;
  std::size_t n_checkins_ = 0;
};

/// Which degree a venue filter thresholds on.
enum class DegreeMeasure { weighted, binary };

/// Keeps venues whose degree is >= min_degree. Users are never removed.
BipartiteGraph filter_low_degree_venues(const BipartiteGraph& g, std::size_t min_degree,
                                        DegreeMeasure measure = DegreeMeasure::weighted);

/// Removes venues where one user accounts for at least `dominance` of the
/// venue's check-ins. dominance must lie in (0, 1].
BipartiteGraph filter_dominated_venues(const BipartiteGraph& g, double dominance);

/// Keeps the venues for which keep[v] is true.
BipartiteGraph select_venues(const BipartiteGraph& g, const std::vector<bool>& keep);

struct ProjectedEdge {
  UserIndex a{};
  UserIndex b{};
  std::uint32_t weight = 0;  // common distinct venues

  friend bool operator==(const ProjectedEdge&, const ProjectedEdge&) = default;
};

/// One-mode user projection; edges have a < b and are sorted.
struct UserProjection {
  std::size_t n_users = 0;
  std::vector<ProjectedEdge> edges;
};

UserProjection project_users(const BipartiteGraph& g);

}  // namespace lbsn

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lbsn/graph.hpp"
#include "lbsn/sampling.hpp"

namespace lbsn {

enum class Method {
  grm,
  assort,
  cf,
  nbi,
  nbi_mod,
  nbi_us,
  nbi_multistep,
  nbi_time,
  loc_baseline,
  type_baseline,
};

std::string_view method_name(Method m);
std::optional<Method> parse_method(std::string_view name);
std::span<const Method> all_methods();

/// Share rule of the resource flow: 1/degree splits or splits proportional
/// to pair check-in counts.
enum class Adjacency { binary, weighted };

struct PredictorConfig {
  Method method = Method::nbi;
  Adjacency adjacency = Adjacency::binary;
  unsigned steps = 1;        // nbi_multistep rounds
  double alpha = 1.0;        // venue type
  double beta = 1.0;         // location
  double gamma = 1.0;        // venue degree
  double delta = 1.0;        // user-similarity seeding
  double epsilon = 1.0;      // trendiness
  double d0_km = 10.0;       // location decay scale
  double tau_seconds = 30.0 * 86400.0;

  /// Throws ConfigError.
  void validate() const;

  /// Canonical text form: the method name, followed by the parameters that
  /// differ from their defaults, e.g. "nbi_multistep(steps=2)".
  std::string label() const;

  /// Inverse of label(); also accepts any parameter order and
  /// "adjacency=weighted". Throws ConfigError.
  static PredictorConfig parse(std::string_view text);

  friend bool operator==(const PredictorConfig&, const PredictorConfig&) = default;
};

class UnknownVenue : public Error {
 public:
  using Error::Error;
};
class IsolatedUser : public Error {
 public:
  using Error::Error;
};
class MissingVenueMeta : public Error {
 public:
  using Error::Error;
};

/// Scores of one user against every venue, indexed by venue.
struct ScoreVector {
  UserIndex user{};
  std::vector<double> scores;
  PredictorConfig method;
  /// The user had no venues; all scores are 0.
  bool isolated_user = false;
};

double haversine_km(GeoPoint a, GeoPoint b);

/// Mean (lat, lon) over the user's check-ins, weighted by multiplicity.
std::optional<GeoPoint> mean_location(const BipartiteGraph& g, UserIndex u);

/// Fraction of the user's check-ins at venues of `category`.
double type_fraction(const BipartiteGraph& g, UserIndex u, std::string_view category);

/// Mean binary degree over the user's distinct venues.
double mean_venue_degree(const BipartiteGraph& g, UserIndex u);

// Per-pair scorers.

double score_grm(const BipartiteGraph& g, VenueIndex v);
/// 0 for isolated users.
double score_assortativity(const BipartiteGraph& g, UserIndex u, VenueIndex v);
/// Adamic-Adar over common venues, skipping venues of binary degree <= 1.
double user_similarity_aa(const BipartiteGraph& g, UserIndex a, UserIndex b);
/// Similarity of u to every user; entry u is 0.
std::vector<double> similarity_row(const BipartiteGraph& g, UserIndex u);
double score_cf(const BipartiteGraph& g, UserIndex u, VenueIndex v);
double score_loc_baseline(const BipartiteGraph& g, UserIndex u, VenueIndex v);
double score_type_baseline(const BipartiteGraph& g, UserIndex u, VenueIndex v);

/// The two half-steps of network-based inference over a fixed graph.
class ResourceFlow {
 public:
  ResourceFlow(const BipartiteGraph& g, Adjacency adjacency) : g_(g), adjacency_(adjacency) {}

  /// Each venue splits its resource among its users.
  void venues_to_users(std::span<const double> venue_res, std::span<double> user_res) const;
  /// Each user splits its resource among its venues.
  void users_to_venues(std::span<const double> user_res, std::span<double> venue_res) const;

 private:
  const BipartiteGraph& g_;
  Adjacency adjacency_;
};

/// Unit resource on each distinct venue of u.
std::vector<double> initial_resource(const BipartiteGraph& g, UserIndex u);

// Full-vector NBI family. All throw IsolatedUser when u has no venues.

ScoreVector score_nbi(const BipartiteGraph& g, UserIndex u, const PredictorConfig& config);
ScoreVector score_nbi_mod(const BipartiteGraph& g, UserIndex u, const PredictorConfig& config);
ScoreVector score_nbi_us(const BipartiteGraph& g, UserIndex u, const PredictorConfig& config);
ScoreVector score_nbi_multistep(const BipartiteGraph& g, UserIndex u,
                                const PredictorConfig& config);
ScoreVector score_nbi_time(const BipartiteGraph& g, UserIndex u, TimeWindow window,
                           const PredictorConfig& config);

/// Fraction of each venue's check-ins inside [start - tau, end + tau).
std::vector<double> venue_trendiness(const BipartiteGraph& g, TimeWindow window,
                                     double tau_seconds);

struct ScoringContext {
  std::optional<TimeWindow> window;  // required by nbi_time
};

/// Dispatches on config.method. Isolated users get an all-zero vector with
/// isolated_user set instead of an exception.
ScoreVector score_user(const BipartiteGraph& g, UserIndex u, const PredictorConfig& config,
                       const ScoringContext& context = {});

}  // namespace lbsn

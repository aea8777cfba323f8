#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lbsn/graph.hpp"

namespace lbsn {

enum class Label { positive, negative };

struct EvalPair {
  UserIndex user{};
  VenueIndex venue{};
  Label label = Label::negative;
  std::uint32_t removed_count = 0;  // check-ins held out; 0 for negatives

  friend bool operator==(const EvalPair&, const EvalPair&) = default;
};

enum class SampleMode { random_batch, time_incremental };

/// Half-open [start, end).
struct TimeWindow {
  Timestamp start = 0;
  Timestamp end = 0;

  bool contains(Timestamp t) const noexcept { return t >= start && t < end; }
  friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

struct EvalSample {
  std::vector<EvalPair> positives;
  std::vector<EvalPair> negatives;
  SampleMode mode = SampleMode::random_batch;
  double fraction = 0.0;  // random mode
  TimeWindow window;      // time mode
  std::uint64_t seed = 0;

  friend bool operator==(const EvalSample&, const EvalSample&) = default;
};

struct SamplingOptions {
  /// |negatives| = round(negative_ratio * |positives|).
  double negative_ratio = 1.0;
  /// Random mode: samples drawn with one seed are nested across fractions.
  bool nested = false;
};

class EmptyGraph : public Error {
 public:
  using Error::Error;
};
class NotEnoughNegatives : public Error {
 public:
  using Error::Error;
};
class EmptyWindow : public Error {
 public:
  using Error::Error;
};

struct RandomSample {
  EvalSample sample;
  BipartiteGraph residual;
};

/// Holds out round(fraction * n_pairs) connected pairs with all their
/// check-ins and draws matched unconnected negatives.
RandomSample sample_random(const BipartiteGraph& g, double fraction, std::uint64_t seed,
                           const SamplingOptions& options = {});

/// Positives are pairs with a check-in inside the window. The graph is not
/// modified; evaluation removes and restores each positive in turn.
EvalSample sample_time(const BipartiteGraph& g, TimeWindow window, std::uint64_t seed,
                       std::optional<std::size_t> max_positives = std::nullopt,
                       const SamplingOptions& options = {});

/// g with every positive of a random-batch sample removed.
BipartiteGraph residual_graph(const BipartiteGraph& g, const EvalSample& sample);

struct ResidualPoint {
  double fraction = 0.0;
  std::size_t remaining_checkins = 0;

  friend bool operator==(const ResidualPoint&, const ResidualPoint&) = default;
};

std::vector<ResidualPoint> residual_checkin_curve(const BipartiteGraph& g,
                                                  std::span<const double> fractions,
                                                  std::uint64_t seed,
                                                  const SamplingOptions& options = {});

/// TSV: label, user, venue, removed_count, preceded by '#' comment lines
/// carrying mode, fraction or window, and seed. Ids are resolved against g.
void write_sample_tsv(const EvalSample& sample, const BipartiteGraph& g, std::ostream& out);
EvalSample read_sample_tsv(std::istream& in, const BipartiteGraph& g);

void save_sample(const EvalSample& sample, const BipartiteGraph& g,
                 const std::filesystem::path& path);
EvalSample load_sample(const std::filesystem::path& path, const BipartiteGraph& g);

std::string mode_name(SampleMode mode);

}  // namespace lbsn

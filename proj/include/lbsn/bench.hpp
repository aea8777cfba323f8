#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lbsn/checkin.hpp"
#include "lbsn/config.hpp"
#include "lbsn/evaluation.hpp"
#include "lbsn/graph.hpp"

namespace lbsn {

struct GraphCounts {
  std::size_t n_users = 0;
  std::size_t n_venues = 0;
  std::size_t n_pairs = 0;
  std::size_t n_checkins = 0;
};

GraphCounts counts_of(const BipartiteGraph& g);

/// The venue filters applied in order: degree first, then dominance.
struct FilterResult {
  BipartiteGraph after_degree;
  BipartiteGraph filtered;
};

FilterResult apply_filters(const BipartiteGraph& raw, const FilterParams& params);

struct HistogramBin {
  std::string node;     // user | venue
  std::string measure;  // binary | weighted
  std::size_t lo = 0;   // inclusive
  std::size_t hi = 0;   // exclusive
  std::size_t count = 0;
};

/// Power-of-two bins [0,1), [1,2), [2,4), ...; only non-empty bins.
std::vector<HistogramBin> degree_histogram(const BipartiteGraph& g);

/// Filtered graph for a run, loaded from or stored into the cache.
struct PreparedGraph {
  BipartiteGraph graph;
  std::string key;           // identifies dataset + ingest + filter settings
  std::uint64_t checksum = 0;
  std::uint64_t dataset_checksum = 0;
  bool from_cache = false;
};

PreparedGraph prepare_graph(const RunConfig& config, std::ostream& log);

/// Sample for (fraction or window, seed), through the sample cache.
EvalSample prepare_sample(const RunConfig& config, const PreparedGraph& prepared,
                          std::optional<double> fraction, std::optional<TimeWindow> window,
                          std::uint64_t seed);

/// Subcommands. Each returns the process exit code; ConfigError and other
/// exceptions propagate to the caller.
int cmd_stats(const RunConfig& config, std::ostream& out, std::ostream& log);
int cmd_bench(RunConfig config, std::ostream& out, std::ostream& log);
int cmd_residual_curve(RunConfig config, std::ostream& out, std::ostream& log);
int cmd_sample(RunConfig config, std::ostream& out, std::ostream& log);
int cmd_filter(const RunConfig& config, std::ostream& out, std::ostream& log);

/// File-name-safe version of a predictor label.
std::string slug(std::string_view label);

}  // namespace lbsn

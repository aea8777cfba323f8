#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lbsn/checkin.hpp"
#include "lbsn/evaluation.hpp"
#include "lbsn/graph.hpp"
#include "lbsn/predictors.hpp"
#include "lbsn/sampling.hpp"

namespace lbsn {

struct FilterParams {
  std::size_t min_degree = 20;
  double dominance = 0.9;
  DegreeMeasure measure = DegreeMeasure::weighted;

  friend bool operator==(const FilterParams&, const FilterParams&) = default;
};

struct SampleSpec {
  std::vector<double> fractions;
  std::vector<TimeWindow> windows;
  std::vector<std::uint64_t> seeds;
  std::optional<std::size_t> max_positives;  // time mode cap
  SamplingOptions options;
};

/// Everything a bench run depends on. Loaded from an INI file:
///
///   [dataset]     path, on_error (skip|abort), schema (tsmc|identity),
///                 user_col venue_col category_col lat_col lon_col time_col n_columns
///   [filter]      min_degree, dominance, degree (weighted|binary)
///   [sample]      fractions, windows (START:END, ...), seeds, max_positives,
///                 negative_ratio, nested
///   [predictors]  methods = grm, cf, nbi_multistep(steps=2), ...
///   [evaluation]  comparison (exact|sampled), draws, comparison_seed, workers
///   [output]      dir, cache
struct RunConfig {
  std::filesystem::path dataset_path;
  Schema schema;
  OnError on_error = OnError::skip;
  FilterParams filter;
  SampleSpec sample;
  std::vector<PredictorConfig> predictors;
  ComparisonMode comparison;
  unsigned workers = 1;
  std::filesystem::path out_dir = "out";
  bool use_cache = true;
  /// Seeds were drawn from the system entropy source because none were given.
  bool seeds_generated = false;

  /// Throws ConfigError.
  void validate() const;

  /// Stable text of every result-affecting setting (excludes workers, the
  /// output directory and caching).
  std::string canonical() const;
};

RunConfig default_run_config();
RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// "START:END" where each bound is epoch seconds or YYYY-MM-DD (UTC midnight).
TimeWindow parse_window(std::string_view text);

/// Comma-separated list that ignores commas inside parentheses.
std::vector<std::string> split_list(std::string_view text);

/// Fills empty seed lists from the system entropy source.
void ensure_seeds(RunConfig& config);

}  // namespace lbsn

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lbsn/graph.hpp"
#include "lbsn/predictors.hpp"
#include "lbsn/sampling.hpp"

namespace lbsn {

struct AucCounts {
  double auc = 0.5;
  std::uint64_t n_comparisons = 0;
  std::uint64_t n_wins = 0;
  std::uint64_t n_ties = 0;
};

/// All |pos| x |neg| comparisons; ties count one half.
AucCounts auc_exact(std::span<const double> positives, std::span<const double> negatives);
/// n_draws independent uniform (positive, negative) comparisons.
AucCounts auc_sampled(std::span<const double> positives, std::span<const double> negatives,
                      std::uint64_t n_draws, std::uint64_t seed);

struct ComparisonMode {
  enum class Kind { exact, sampled } kind = Kind::exact;
  std::uint64_t n_draws = 1'000'000;
  std::uint64_t seed = 0;

  friend bool operator==(const ComparisonMode&, const ComparisonMode&) = default;
};

struct EvalOptions {
  ComparisonMode comparison;
  unsigned workers = 1;
};

struct SampleProvenance {
  SampleMode mode = SampleMode::random_batch;
  double fraction = 0.0;
  TimeWindow window;
  std::uint64_t seed = 0;

  /// "0.1" or "start:end".
  std::string parameter() const;
  friend bool operator==(const SampleProvenance&, const SampleProvenance&) = default;
};

SampleProvenance provenance_of(const EvalSample& sample);

struct AucReport {
  double auc = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  std::uint64_t n_comparisons = 0;
  std::uint64_t n_wins = 0;
  std::uint64_t n_ties = 0;
  /// Sample pairs whose user had no venues left when scored.
  std::size_t n_isolated = 0;
  PredictorConfig method;
  SampleProvenance sample_meta;
  double wall_time = 0.0;
  /// Set instead of auc when the cell failed inside a grid.
  std::optional<std::string> error;
};

class EmptySample : public Error {
 public:
  using Error::Error;
};

class ScorerError : public Error {
 public:
  using Error::Error;
};

/// Scores of every sample pair, in sample order, plus the AUC ingredients.
struct PairScores {
  std::vector<double> positives;
  std::vector<double> negatives;
  std::size_t n_isolated = 0;
};

/// Random-batch samples: g must be the residual graph. Time-incremental
/// samples: g is the full graph; each positive is removed, scored and
/// restored, negatives are scored against the unmodified graph. g is left
/// structurally identical to its state on entry.
PairScores score_sample(BipartiteGraph& g, const EvalSample& sample,
                        const PredictorConfig& predictor, unsigned workers = 1);

AucReport evaluate_auc(BipartiteGraph& g, const EvalSample& sample,
                       const PredictorConfig& predictor, const EvalOptions& options = {});

/// Cross product samples x predictors, ordered by sample then predictor.
/// `g` is the full (pre-sampling) graph; residual graphs of random-batch
/// samples are derived from it. Failed cells carry `error`.
std::vector<AucReport> evaluate_grid(const BipartiteGraph& g, std::span<const EvalSample> samples,
                                     std::span<const PredictorConfig> predictors,
                                     const EvalOptions& options = {});

// CSV rows: method, mode, fraction_or_window, seed, n_pos, n_neg, auc, wall_time
void write_reports_csv(std::span<const AucReport> reports, std::ostream& out,
                       bool include_wall_time = true);

struct ReportRow {
  std::string method;
  std::string mode;
  std::string fraction_or_window;
  std::uint64_t seed = 0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  std::optional<double> auc;  // empty for failed cells
  std::optional<double> wall_time;
  std::string error;
};

std::vector<ReportRow> read_reports_csv(std::istream& in);

}  // namespace lbsn

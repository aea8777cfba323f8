#include "lbsn/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>

#include "lbsn/csv.hpp"
#include "lbsn/random.hpp"
#include "parallel.hpp"
#include "text.hpp"

namespace lbsn {

namespace {

double auc_of(std::uint64_t wins, std::uint64_t ties, std::uint64_t comparisons) {
  return (static_cast<double>(wins) + 0.5 * static_cast<double>(ties)) /
         static_cast<double>(comparisons);
}

struct Slot {
  bool positive = false;
  std::size_t index = 0;
  VenueIndex venue{};
};

// Pairs grouped by user, users in ascending order.
std::map<UserIndex, std::vector<Slot>> group_by_user(std::span<const EvalPair> pos,
                                                     std::span<const EvalPair> neg) {
  std::map<UserIndex, std::vector<Slot>> groups;
  for (std::size_t i = 0; i < pos.size(); ++i) groups[pos[i].user].push_back({true, i, pos[i].venue});
  for (std::size_t i = 0; i < neg.size(); ++i) groups[neg[i].user].push_back({false, i, neg[i].venue});
  return groups;
}

double checked_score(const BipartiteGraph& g, const ScoreVector& sv, VenueIndex v) {
  if (!g.contains(v)) throw ScorerError("venue index out of range for user " + g.user_id(sv.user));
  const double s = sv.scores[idx(v)];
  if (!std::isfinite(s)) {
    throw ScorerError("non-finite score for (" + g.user_id(sv.user) + ", " + g.venue_id(v) + ")");
  }
  return s;
}

// Scores all pairs of each user group with one score vector per user.
void score_groups(const BipartiteGraph& g, const std::map<UserIndex, std::vector<Slot>>& groups,
                  const PredictorConfig& predictor, const ScoringContext& ctx, unsigned workers,
                  PairScores& out, std::vector<char>& isolated_pos, std::vector<char>& isolated_neg) {
  std::vector<const std::pair<const UserIndex, std::vector<Slot>>*> items;
  for (const auto& kv : groups) items.push_back(&kv);
  detail::parallel_for(items.size(), workers, [&](std::size_t i, unsigned) {
    const auto& [user, slots] = *items[i];
    const auto sv = score_user(g, user, predictor, ctx);
    for (const auto& s : slots) {
      const double score = checked_score(g, sv, s.venue);
      if (s.positive) {
        out.positives[s.index] = score;
        isolated_pos[s.index] = sv.isolated_user;
      } else {
        out.negatives[s.index] = score;
        isolated_neg[s.index] = sv.isolated_user;
      }
    }
  });
}

class PairRemoval {
 public:
  PairRemoval(BipartiteGraph& g, UserIndex u, VenueIndex v) : g_(g), record_(g.remove_pair(u, v)) {}
  ~PairRemoval() { g_.restore_pair(std::move(record_)); }
  PairRemoval(const PairRemoval&) = delete;
  PairRemoval& operator=(const PairRemoval&) = delete;

 private:
  BipartiteGraph& g_;
  RemovalRecord record_;
};

}  // namespace

AucCounts auc_exact(std::span<const double> positives, std::span<const double> negatives) {
  if (positives.empty() || negatives.empty()) throw EmptySample("AUC needs positives and negatives");
  std::vector<double> neg(negatives.begin(), negatives.end());
  std::sort(neg.begin(), neg.end());
  AucCounts c;
  for (double p : positives) {
    const auto lo = std::lower_bound(neg.begin(), neg.end(), p);
    const auto hi = std::upper_bound(lo, neg.end(), p);
    c.n_wins += static_cast<std::uint64_t>(lo - neg.begin());
    c.n_ties += static_cast<std::uint64_t>(hi - lo);
  }
  c.n_comparisons = static_cast<std::uint64_t>(positives.size()) * negatives.size();
  c.auc = auc_of(c.n_wins, c.n_ties, c.n_comparisons);
  return c;
}

AucCounts auc_sampled(std::span<const double> positives, std::span<const double> negatives,
                      std::uint64_t n_draws, std::uint64_t seed) {
  if (positives.empty() || negatives.empty()) throw EmptySample("AUC needs positives and negatives");
  if (n_draws == 0) throw ConfigError("sampled AUC needs at least one draw");
  Rng rng(seed);
  AucCounts c;
  for (std::uint64_t i = 0; i < n_draws; ++i) {
    const double p = positives[rng.below(positives.size())];
    const double q = negatives[rng.below(negatives.size())];
    if (p > q) ++c.n_wins;
    else if (p == q) ++c.n_ties;
  }
  c.n_comparisons = n_draws;
  c.auc = auc_of(c.n_wins, c.n_ties, c.n_comparisons);
  return c;
}

std::string SampleProvenance::parameter() const {
  if (mode == SampleMode::random_batch) return detail::format_double(fraction);
  return std::to_string(window.start) + ":" + std::to_string(window.end);
}

SampleProvenance provenance_of(const EvalSample& sample) {
  return SampleProvenance{sample.mode, sample.fraction, sample.window, sample.seed};
}

PairScores score_sample(BipartiteGraph& g, const EvalSample& sample,
                        const PredictorConfig& predictor, unsigned workers) {
  predictor.validate();
  PairScores out;
  out.positives.assign(sample.positives.size(), 0.0);
  out.negatives.assign(sample.negatives.size(), 0.0);
  std::vector<char> iso_pos(sample.positives.size(), 0), iso_neg(sample.negatives.size(), 0);

  ScoringContext ctx;
  if (sample.mode == SampleMode::random_batch) {
    score_groups(g, group_by_user(sample.positives, sample.negatives), predictor, ctx, workers, out,
                 iso_pos, iso_neg);
  } else {
    ctx.window = sample.window;
    score_groups(g, group_by_user({}, sample.negatives), predictor, ctx, workers, out, iso_pos,
                 iso_neg);
    const auto& pos = sample.positives;
    auto score_positive = [&](BipartiteGraph& graph, std::size_t i) {
      PairRemoval removal(graph, pos[i].user, pos[i].venue);
      const auto sv = score_user(graph, pos[i].user, predictor, ctx);
      out.positives[i] = checked_score(graph, sv, pos[i].venue);
      iso_pos[i] = sv.isolated_user;
    };
    if (workers <= 1 || pos.size() < 2) {
      for (std::size_t i = 0; i < pos.size(); ++i) score_positive(g, i);
    } else {
      // One private clone per worker; the caller's graph is only read.
      const auto n_workers = std::min<std::size_t>(workers, pos.size());
      std::vector<BipartiteGraph> clones(n_workers, g);
      detail::parallel_for(pos.size(), static_cast<unsigned>(n_workers),
                           [&](std::size_t i, unsigned w) { score_positive(clones[w], i); });
    }
  }
  out.n_isolated = static_cast<std::size_t>(std::count(iso_pos.begin(), iso_pos.end(), 1) +
                                            std::count(iso_neg.begin(), iso_neg.end(), 1));
  return out;
}

AucReport evaluate_auc(BipartiteGraph& g, const EvalSample& sample,
                       const PredictorConfig& predictor, const EvalOptions& options) {
  if (sample.positives.empty() || sample.negatives.empty()) {
    throw EmptySample("sample has no positive or no negative pairs");
  }
  const auto start = std::chrono::steady_clock::now();
  const auto scores = score_sample(g, sample, predictor, options.workers);
  const auto counts =
      options.comparison.kind == ComparisonMode::Kind::exact
          ? auc_exact(scores.positives, scores.negatives)
          : auc_sampled(scores.positives, scores.negatives, options.comparison.n_draws,
                        options.comparison.seed);
  AucReport r;
  r.auc = counts.auc;
  r.n_pos = scores.positives.size();
  r.n_neg = scores.negatives.size();
  r.n_comparisons = counts.n_comparisons;
  r.n_wins = counts.n_wins;
  r.n_ties = counts.n_ties;
  r.n_isolated = scores.n_isolated;
  r.method = predictor;
  r.sample_meta = provenance_of(sample);
  r.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<AucReport> evaluate_grid(const BipartiteGraph& g, std::span<const EvalSample> samples,
                                     std::span<const PredictorConfig> predictors,
                                     const EvalOptions& options) {
  if (samples.empty() || predictors.empty()) throw ConfigError("grid needs samples and predictors");
  std::vector<AucReport> reports;
  reports.reserve(samples.size() * predictors.size());
  for (const auto& sample : samples) {
    std::optional<BipartiteGraph> graph;
    std::string sample_error;
    try {
      graph = sample.mode == SampleMode::random_batch ? residual_graph(g, sample) : g;
    } catch (const std::exception& e) {
      sample_error = e.what();
    }
    for (const auto& predictor : predictors) {
      AucReport r;
      r.method = predictor;
      r.sample_meta = provenance_of(sample);
      r.n_pos = sample.positives.size();
      r.n_neg = sample.negatives.size();
      if (!graph) {
        r.error = sample_error;
      } else {
        try {
          r = evaluate_auc(*graph, sample, predictor, options);
        } catch (const std::exception& e) {
          r.error = e.what();
        }
      }
      reports.push_back(std::move(r));
    }
  }
  return reports;
}

void write_reports_csv(std::span<const AucReport> reports, std::ostream& out,
                       bool include_wall_time) {
  std::vector<std::string> header = {"method", "mode", "fraction_or_window", "seed",
                                     "n_pos",  "n_neg", "auc"};
  if (include_wall_time) header.push_back("wall_time");
  header.push_back("error");
  csv::write_row(out, header);
  for (const auto& r : reports) {
    std::vector<std::string> row = {r.method.label(),
                                    mode_name(r.sample_meta.mode),
                                    r.sample_meta.parameter(),
                                    std::to_string(r.sample_meta.seed),
                                    std::to_string(r.n_pos),
                                    std::to_string(r.n_neg),
                                    r.error ? "" : detail::format_double(r.auc)};
    if (include_wall_time) row.push_back(detail::format_double(r.wall_time));
    row.push_back(r.error.value_or(""));
    csv::write_row(out, row);
  }
}

std::vector<ReportRow> read_reports_csv(std::istream& in) {
  const auto rows = csv::read(in);
  if (rows.empty()) throw Error("report csv is empty");
  const auto& header = rows.front();
  auto column = [&](std::string_view name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  };
  auto require = [&](std::string_view name) {
    if (auto c = column(name)) return *c;
    throw Error("report csv lacks column " + std::string(name));
  };
  const auto c_method = require("method"), c_mode = require("mode"),
             c_param = require("fraction_or_window"), c_seed = require("seed"),
             c_pos = require("n_pos"), c_neg = require("n_neg"), c_auc = require("auc"),
             c_err = require("error");
  const auto c_wall = column("wall_time");

  std::vector<ReportRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i];
    ReportRow r;
    r.method = f[c_method];
    r.mode = f[c_mode];
    r.fraction_or_window = f[c_param];
    r.error = f[c_err];
    if (!detail::parse_integer(f[c_seed], r.seed) || !detail::parse_integer(f[c_pos], r.n_pos) ||
        !detail::parse_integer(f[c_neg], r.n_neg)) {
      throw Error("report csv row " + std::to_string(i) + ": bad integer field");
    }
    if (!f[c_auc].empty()) {
      double auc = 0.0;
      if (!detail::parse_double(f[c_auc], auc)) throw Error("report csv: bad auc");
      r.auc = auc;
    }
    if (c_wall && !f[*c_wall].empty()) {
      double w = 0.0;
      if (!detail::parse_double(f[*c_wall], w)) throw Error("report csv: bad wall_time");
      r.wall_time = w;
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace lbsn

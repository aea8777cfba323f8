#include "lbsn/sampling.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "lbsn/random.hpp"
#include "text.hpp"

namespace lbsn {

namespace {

constexpr std::uint64_t kPositiveStream = 1;
constexpr std::uint64_t kNegativeStream = 2;

using Pair = std::pair<UserIndex, VenueIndex>;

std::uint64_t pair_key(UserIndex u, VenueIndex v) {
  return (static_cast<std::uint64_t>(idx(u)) << 32) | idx(v);
}

std::vector<Pair> connected_pairs(const BipartiteGraph& g) {
  std::vector<Pair> pairs;
  pairs.reserve(g.n_pairs());
  for (std::size_t u = 0; u < g.n_users(); ++u) {
    for (const auto& l : g.venues_of(user_at(u))) pairs.emplace_back(user_at(u), l.venue);
  }
  return pairs;
}

bool pair_less(const EvalPair& a, const EvalPair& b) {
  return std::pair(a.user, a.venue) < std::pair(b.user, b.venue);
}

// Uniform unconnected pairs without replacement: rejection while the space is
// sparse, full enumeration otherwise.
std::vector<EvalPair> draw_negatives(const BipartiteGraph& g, std::size_t count, Rng& rng) {
  const auto space = static_cast<std::uint64_t>(g.n_users()) * g.n_venues();
  const auto unconnected = space - g.n_pairs();
  if (count > unconnected) {
    throw NotEnoughNegatives("need " + std::to_string(count) + " negatives but only " +
                             std::to_string(unconnected) + " unconnected pairs exist");
  }
  std::vector<EvalPair> out;
  out.reserve(count);
  if (count * 2 > unconnected) {
    std::vector<Pair> all;
    all.reserve(unconnected);
    for (std::size_t u = 0; u < g.n_users(); ++u) {
      for (std::size_t v = 0; v < g.n_venues(); ++v) {
        if (!g.connected(user_at(u), venue_at(v))) all.emplace_back(user_at(u), venue_at(v));
      }
    }
    rng.shuffle(std::span(all));
    for (std::size_t i = 0; i < count; ++i) {
      out.push_back({all[i].first, all[i].second, Label::negative, 0});
    }
  } else {
    std::unordered_set<std::uint64_t> drawn;
    while (out.size() < count) {
      const auto u = user_at(rng.below(g.n_users()));
      const auto v = venue_at(rng.below(g.n_venues()));
      if (g.connected(u, v) || !drawn.insert(pair_key(u, v)).second) continue;
      out.push_back({u, v, Label::negative, 0});
    }
  }
  std::sort(out.begin(), out.end(), pair_less);
  return out;
}

std::size_t negative_count(std::size_t n_pos, const SamplingOptions& options) {
  if (!(options.negative_ratio > 0.0) || !std::isfinite(options.negative_ratio)) {
    throw ConfigError("negative_ratio must be positive");
  }
  return static_cast<std::size_t>(std::llround(options.negative_ratio * static_cast<double>(n_pos)));
}

}  // namespace

std::string mode_name(SampleMode mode) {
  return mode == SampleMode::random_batch ? "random_batch" : "time_incremental";
}

RandomSample sample_random(const BipartiteGraph& g, double fraction, std::uint64_t seed,
                           const SamplingOptions& options) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("fraction must lie in (0, 1]");
  if (g.n_pairs() == 0) throw EmptyGraph("graph has no connected pairs");

  const auto stream = options.nested ? seed : mix_seed(seed, std::bit_cast<std::uint64_t>(fraction));
  auto pairs = connected_pairs(g);
  const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(pairs.size())));
  const auto n_neg = negative_count(k, options);

  Rng pos_rng(mix_seed(stream, kPositiveStream));
  pos_rng.shuffle(std::span(pairs));

  RandomSample out;
  auto& s = out.sample;
  s.mode = SampleMode::random_batch;
  s.fraction = fraction;
  s.seed = seed;
  for (std::size_t i = 0; i < k; ++i) {
    const auto [u, v] = pairs[i];
    s.positives.push_back({u, v, Label::positive, g.pair_count(u, v)});
  }
  std::sort(s.positives.begin(), s.positives.end(), pair_less);

  Rng neg_rng(mix_seed(stream, kNegativeStream));
  s.negatives = draw_negatives(g, n_neg, neg_rng);
  out.residual = residual_graph(g, s);
  return out;
}

EvalSample sample_time(const BipartiteGraph& g, TimeWindow window, std::uint64_t seed,
                       std::optional<std::size_t> max_positives, const SamplingOptions& options) {
  if (!(window.start < window.end)) throw ConfigError("time window start must precede its end");
  EvalSample s;
  s.mode = SampleMode::time_incremental;
  s.window = window;
  s.seed = seed;
  for (std::size_t u = 0; u < g.n_users(); ++u) {
    for (const auto& l : g.venues_of(user_at(u))) {
      auto it = std::lower_bound(l.times.begin(), l.times.end(), window.start);
      if (it != l.times.end() && *it < window.end) {
        s.positives.push_back({user_at(u), l.venue, Label::positive, l.count()});
      }
    }
  }
  if (s.positives.empty()) throw EmptyWindow("no check-ins inside the time window");
  if (max_positives && s.positives.size() > *max_positives) {
    Rng rng(mix_seed(seed, kPositiveStream));
    rng.shuffle(std::span(s.positives));
    s.positives.resize(*max_positives);
    std::sort(s.positives.begin(), s.positives.end(), pair_less);
  }
  Rng neg_rng(mix_seed(seed, kNegativeStream));
  s.negatives = draw_negatives(g, negative_count(s.positives.size(), options), neg_rng);
  return s;
}

BipartiteGraph residual_graph(const BipartiteGraph& g, const EvalSample& sample) {
  BipartiteGraph residual = g;
  for (const auto& p : sample.positives) residual.remove_pair(p.user, p.venue);
  return residual;
}

std::vector<ResidualPoint> residual_checkin_curve(const BipartiteGraph& g,
                                                  std::span<const double> fractions,
                                                  std::uint64_t seed,
                                                  const SamplingOptions& options) {
  if (fractions.empty()) throw ConfigError("fraction grid is empty");
  std::vector<ResidualPoint> curve;
  for (double f : fractions) {
    auto rs = sample_random(g, f, seed, options);
    curve.push_back({f, rs.residual.n_checkins()});
  }
  return curve;
}

void write_sample_tsv(const EvalSample& sample, const BipartiteGraph& g, std::ostream& out) {
  out << "# mode=" << mode_name(sample.mode) << '\n';
  if (sample.mode == SampleMode::random_batch) {
    out << "# fraction=" << detail::format_double(sample.fraction) << '\n';
  } else {
    out << "# window=" << sample.window.start << ':' << sample.window.end << '\n';
  }
  out << "# seed=" << sample.seed << '\n';
  out << "label\tuser\tvenue\tremoved_count\n";
  auto row = [&](const EvalPair& p) {
    out << (p.label == Label::positive ? "positive" : "negative") << '\t' << g.user_id(p.user)
        << '\t' << g.venue_id(p.venue) << '\t' << p.removed_count << '\n';
  };
  for (const auto& p : sample.positives) row(p);
  for (const auto& p : sample.negatives) row(p);
}

EvalSample read_sample_tsv(std::istream& in, const BipartiteGraph& g) {
  EvalSample s;
  std::string line;
  bool header = false;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& why) {
    return Error("sample line " + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.starts_with("#")) {
      auto body = detail::trim(std::string_view(line).substr(1));
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;
      const auto key = body.substr(0, eq);
      const auto value = body.substr(eq + 1);
      if (key == "mode") {
        if (value == "random_batch") s.mode = SampleMode::random_batch;
        else if (value == "time_incremental") s.mode = SampleMode::time_incremental;
        else throw fail("unknown mode");
      } else if (key == "fraction") {
        if (!detail::parse_double(value, s.fraction)) throw fail("bad fraction");
      } else if (key == "window") {
        const auto colon = value.find(':');
        if (colon == std::string_view::npos ||
            !detail::parse_integer(value.substr(0, colon), s.window.start) ||
            !detail::parse_integer(value.substr(colon + 1), s.window.end)) {
          throw fail("bad window");
        }
      } else if (key == "seed") {
        if (!detail::parse_integer(value, s.seed)) throw fail("bad seed");
      }
      continue;
    }
    if (!header) {
      if (line != "label\tuser\tvenue\tremoved_count") throw fail("missing header");
      header = true;
      continue;
    }
    const auto f = detail::split(line, '\t');
    if (f.size() != 4) throw fail("expected 4 columns");
    EvalPair p;
    if (f[0] == "positive") p.label = Label::positive;
    else if (f[0] == "negative") p.label = Label::negative;
    else throw fail("unknown label");
    p.user = g.user(f[1]);
    p.venue = g.venue(f[2]);
    if (!detail::parse_integer(f[3], p.removed_count)) throw fail("bad removed_count");
    if ((p.removed_count > 0) != (p.label == Label::positive)) throw fail("inconsistent count");
    (p.label == Label::positive ? s.positives : s.negatives).push_back(p);
  }
  if (!header) throw Error("sample file lacks a header");
  return s;
}

void save_sample(const EvalSample& sample, const BipartiteGraph& g,
                 const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_sample_tsv(sample, g, out);
  if (!out) throw IoError("write failure: " + path.string());
}

EvalSample load_sample(const std::filesystem::path& path, const BipartiteGraph& g) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_sample_tsv(in, g);
}

}  // namespace lbsn

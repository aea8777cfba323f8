#include "lbsn/bench.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "lbsn/csv.hpp"
#include "lbsn/graph_io.hpp"
#include "lbsn/hash.hpp"
#include "text.hpp"

namespace lbsn {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset: " + path.string());
  return std::string{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::string filter_text(const FilterParams& f) {
  return std::to_string(f.min_degree) + "," + detail::format_double(f.dominance) + "," +
         (f.measure == DegreeMeasure::weighted ? "weighted" : "binary");
}

ordered_json counts_json(const GraphCounts& c) {
  ordered_json j;
  j["n_users"] = c.n_users;
  j["n_venues"] = c.n_venues;
  j["n_pairs"] = c.n_pairs;
  j["n_checkins"] = c.n_checkins;
  return j;
}

double removed_fraction(std::size_t before, std::size_t after, std::size_t base) {
  return base == 0 ? 0.0 : static_cast<double>(before - after) / static_cast<double>(base);
}

Dataset read_dataset(const RunConfig& config, const std::string& bytes) {
  std::istringstream in(bytes);
  return parse_dataset(in, config.schema, config.on_error);
}

struct SampleCell {
  std::optional<double> fraction;
  std::optional<TimeWindow> window;
  std::uint64_t seed = 0;
};

std::vector<SampleCell> sample_cells(const RunConfig& config) {
  std::vector<SampleCell> cells;
  for (double f : config.sample.fractions) {
    for (auto seed : config.sample.seeds) cells.push_back({f, std::nullopt, seed});
  }
  for (const auto& w : config.sample.windows) {
    for (auto seed : config.sample.seeds) cells.push_back({std::nullopt, w, seed});
  }
  return cells;
}

SampleProvenance provenance_of(const SampleCell& cell) {
  SampleProvenance p;
  p.seed = cell.seed;
  if (cell.fraction) {
    p.mode = SampleMode::random_batch;
    p.fraction = *cell.fraction;
  } else {
    p.mode = SampleMode::time_incremental;
    p.window = *cell.window;
  }
  return p;
}

void write_curves(const std::vector<AucReport>& reports, const fs::path& dir,
                  std::vector<std::string>& files) {
  struct Point {
    double lo = 0.0, hi = 0.0;  // fraction, or window bounds
    std::vector<double> aucs;
  };
  // (label, mode) -> ordered points
  std::map<std::pair<std::string, int>, std::map<std::pair<double, double>, Point>> curves;
  for (const auto& r : reports) {
    const auto& s = r.sample_meta;
    const bool random = s.mode == SampleMode::random_batch;
    const auto key = random ? std::pair(s.fraction, 0.0)
                            : std::pair(static_cast<double>(s.window.start),
                                        static_cast<double>(s.window.end));
    auto& point = curves[{r.method.label(), random ? 0 : 1}][key];
    point.lo = key.first;
    point.hi = key.second;
    if (!r.error) point.aucs.push_back(r.auc);
  }
  for (const auto& [id, points] : curves) {
    const bool random = id.second == 0;
    const auto name = "curve_" + slug(id.first) + (random ? "_random.csv" : "_time.csv");
    auto out = open_out(dir / name);
    files.push_back("curves/" + name);
    if (random) {
      csv::write_row(out, {"fraction", "auc_mean", "auc_min", "auc_max", "n_seeds"});
    } else {
      csv::write_row(out, {"window_start", "window_end", "auc_mean", "auc_min", "auc_max", "n_seeds"});
    }
    for (const auto& [key, p] : points) {
      std::vector<std::string> row;
      if (random) {
        row.push_back(detail::format_double(p.lo));
      } else {
        row.push_back(std::to_string(static_cast<Timestamp>(p.lo)));
        row.push_back(std::to_string(static_cast<Timestamp>(p.hi)));
      }
      if (p.aucs.empty()) {
        row.insert(row.end(), {"", "", ""});
      } else {
        double sum = 0.0;
        for (double a : p.aucs) sum += a;
        row.push_back(detail::format_double(sum / static_cast<double>(p.aucs.size())));
        row.push_back(detail::format_double(*std::min_element(p.aucs.begin(), p.aucs.end())));
        row.push_back(detail::format_double(*std::max_element(p.aucs.begin(), p.aucs.end())));
      }
      row.push_back(std::to_string(p.aucs.size()));
      csv::write_row(out, row);
    }
  }
}

}  // namespace

GraphCounts counts_of(const BipartiteGraph& g) {
  return {g.n_users(), g.n_venues(), g.n_pairs(), g.n_checkins()};
}

FilterResult apply_filters(const BipartiteGraph& raw, const FilterParams& params) {
  FilterResult r;
  r.after_degree = filter_low_degree_venues(raw, params.min_degree, params.measure);
  r.filtered = filter_dominated_venues(r.after_degree, params.dominance);
  return r;
}

std::vector<HistogramBin> degree_histogram(const BipartiteGraph& g) {
  std::vector<HistogramBin> bins;
  auto bin_of = [](std::size_t d) -> std::pair<std::size_t, std::size_t> {
    if (d == 0) return {0, 1};
    std::size_t lo = 1;
    while (lo * 2 <= d) lo *= 2;
    return {lo, lo * 2};
  };
  auto add = [&](const char* node, const char* measure, const std::vector<std::size_t>& degrees) {
    std::map<std::size_t, std::pair<std::size_t, std::size_t>> counts;  // lo -> (hi, n)
    for (auto d : degrees) {
      const auto [lo, hi] = bin_of(d);
      auto& c = counts[lo];
      c.first = hi;
      ++c.second;
    }
    for (const auto& [lo, c] : counts) bins.push_back({node, measure, lo, c.first, c.second});
  };
  std::vector<std::size_t> ub, uw, vb, vw;
  for (std::size_t u = 0; u < g.n_users(); ++u) {
    ub.push_back(g.binary_degree(user_at(u)));
    uw.push_back(g.weighted_degree(user_at(u)));
  }
  for (std::size_t v = 0; v < g.n_venues(); ++v) {
    vb.push_back(g.binary_degree(venue_at(v)));
    vw.push_back(g.weighted_degree(venue_at(v)));
  }
  add("user", "binary", ub);
  add("user", "weighted", uw);
  add("venue", "binary", vb);
  add("venue", "weighted", vw);
  return bins;
}

std::string slug(std::string_view label) {
  std::string out;
  for (char c : label) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                      c == '.' || c == '-';
    if (keep) out += c;
    else if (c != ')') out += '_';
  }
  return out;
}

PreparedGraph prepare_graph(const RunConfig& config, std::ostream& log) {
  const auto bytes = read_file(config.dataset_path);
  PreparedGraph p;
  p.dataset_checksum = fnv1a(bytes);
  // Only ingest and filter settings affect the graph.
  std::ostringstream key;
  key << hex64(p.dataset_checksum) << '|' << config.schema.user << ',' << config.schema.venue << ','
      << config.schema.category << ',' << config.schema.latitude << ',' << config.schema.longitude
      << ',' << config.schema.timestamp << ',' << config.schema.n_columns << '|'
      << (config.on_error == OnError::skip ? "skip" : "abort") << '|' << filter_text(config.filter);
  p.key = hex64(fnv1a(key.str()));

  const auto cache = config.out_dir / "cache" / ("graph-" + p.key + ".tsv");
  if (config.use_cache && fs::exists(cache)) {
    p.graph = load_graph(cache);
    p.from_cache = true;
    log << "loaded filtered graph from " << cache.string() << '\n';
  } else {
    auto ds = read_dataset(config, bytes);
    if (ds.skipped_lines) log << "skipped " << ds.skipped_lines << " malformed lines\n";
    const auto raw = BipartiteGraph::from_checkins(ds.checkins);
    p.graph = apply_filters(raw, config.filter).filtered;
    if (config.use_cache) {
      ensure_dir(cache.parent_path());
      save_graph(p.graph, cache);
    }
  }
  std::ostringstream tsv;
  write_graph_tsv(p.graph, tsv);
  p.checksum = Fnv1a().update(p.key).update(tsv.str()).digest();
  return p;
}

EvalSample prepare_sample(const RunConfig& config, const PreparedGraph& prepared,
                          std::optional<double> fraction, std::optional<TimeWindow> window,
                          std::uint64_t seed) {
  std::ostringstream key;
  key << prepared.key << '|' << (fraction ? "random" : "time") << '|'
      << (fraction ? detail::format_double(*fraction)
                   : std::to_string(window->start) + ":" + std::to_string(window->end))
      << '|' << seed << '|'
      << (config.sample.max_positives ? std::to_string(*config.sample.max_positives) : "") << '|'
      << detail::format_double(config.sample.options.negative_ratio) << '|'
      << config.sample.options.nested;
  const auto cache = config.out_dir / "cache" / ("sample-" + hex64(fnv1a(key.str())) + ".tsv");
  if (config.use_cache && fs::exists(cache)) return load_sample(cache, prepared.graph);

  EvalSample s = fraction ? sample_random(prepared.graph, *fraction, seed, config.sample.options).sample
                          : sample_time(prepared.graph, *window, seed, config.sample.max_positives,
                                        config.sample.options);
  if (config.use_cache) {
    ensure_dir(cache.parent_path());
    save_sample(s, prepared.graph, cache);
  }
  return s;
}

int cmd_stats(const RunConfig& config, std::ostream& out, std::ostream& log) {
  if (config.dataset_path.empty()) throw ConfigError("no dataset path given");
  config.schema.validate();
  const auto ds = load_dataset(config.dataset_path, config.schema, config.on_error);
  if (ds.skipped_lines) log << "skipped " << ds.skipped_lines << " malformed lines\n";
  const auto raw = BipartiteGraph::from_checkins(ds.checkins);
  const auto fr = apply_filters(raw, config.filter);

  const auto rc = counts_of(raw), dc = counts_of(fr.after_degree), fc = counts_of(fr.filtered);
  ordered_json j;
  j["dataset"] = ordered_json::parse(to_json(ds.stats));
  j["skipped_lines"] = ds.skipped_lines;
  j["raw"] = counts_json(rc);
  j["filter"] = filter_text(config.filter);
  j["after_degree_filter"] = counts_json(dc);
  j["filtered"] = counts_json(fc);
  j["removed_pair_fraction"] = {{"degree", removed_fraction(rc.n_pairs, dc.n_pairs, rc.n_pairs)},
                                {"dominance", removed_fraction(dc.n_pairs, fc.n_pairs, rc.n_pairs)}};
  j["removed_checkin_fraction"] = {
      {"degree", removed_fraction(rc.n_checkins, dc.n_checkins, rc.n_checkins)},
      {"dominance", removed_fraction(dc.n_checkins, fc.n_checkins, rc.n_checkins)}};
  out << j.dump(2) << '\n';

  ensure_dir(config.out_dir);
  auto hist = open_out(config.out_dir / "degree_histogram.csv");
  csv::write_row(hist, {"graph", "node", "measure", "bin_lo", "bin_hi", "count"});
  for (const auto& [name, g] : {std::pair<const char*, const BipartiteGraph*>{"raw", &raw},
                                {"filtered", &fr.filtered}}) {
    for (const auto& b : degree_histogram(*g)) {
      csv::write_row(hist, {name, b.node, b.measure, std::to_string(b.lo), std::to_string(b.hi),
                            std::to_string(b.count)});
    }
  }
  return 0;
}

int cmd_bench(RunConfig config, std::ostream& out, std::ostream& log) {
  ensure_seeds(config);
  config.validate();
  if (config.seeds_generated) log << "generated seed " << config.sample.seeds.front() << '\n';
  const auto prepared = prepare_graph(config, log);
  log << "filtered graph: " << prepared.graph.n_users() << " users, " << prepared.graph.n_venues()
      << " venues, " << prepared.graph.n_checkins() << " check-ins\n";

  EvalOptions options{config.comparison, config.workers};
  std::vector<AucReport> reports;
  ordered_json samples = ordered_json::array();
  for (const auto& cell : sample_cells(config)) {
    const auto prov = provenance_of(cell);
    ordered_json sj;
    sj["mode"] = mode_name(prov.mode);
    sj["parameter"] = prov.parameter();
    sj["seed"] = cell.seed;
    try {
      const auto sample = prepare_sample(config, prepared, cell.fraction, cell.window, cell.seed);
      sj["n_pos"] = sample.positives.size();
      sj["n_neg"] = sample.negatives.size();
      auto cell_reports = evaluate_grid(prepared.graph, std::span(&sample, 1), config.predictors, options);
      for (auto& r : cell_reports) {
        log << r.method.label() << ' ' << mode_name(prov.mode) << ' ' << prov.parameter() << " seed "
            << cell.seed << ": " << (r.error ? "error: " + *r.error : detail::format_double(r.auc))
            << '\n';
        reports.push_back(std::move(r));
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      sj["error"] = e.what();
      log << "sample " << prov.parameter() << " seed " << cell.seed << " failed: " << e.what() << '\n';
      for (const auto& p : config.predictors) {
        AucReport r;
        r.method = p;
        r.sample_meta = prov;
        r.error = e.what();
        reports.push_back(std::move(r));
      }
    }
    samples.push_back(std::move(sj));
  }

  ensure_dir(config.out_dir / "curves");
  std::vector<std::string> files = {"results.csv", "results_timed.csv"};
  {
    auto f = open_out(config.out_dir / "results.csv");
    write_reports_csv(reports, f, false);
  }
  {
    auto f = open_out(config.out_dir / "results_timed.csv");
    write_reports_csv(reports, f, true);
  }
  write_curves(reports, config.out_dir / "curves", files);

  ordered_json m;
  m["config_hash"] = hex64(fnv1a(config.canonical()));
  m["dataset"] = config.dataset_path.generic_string();
  m["dataset_checksum"] = hex64(prepared.dataset_checksum);
  m["graph_key"] = prepared.key;
  m["filtered_graph_checksum"] = hex64(prepared.checksum);
  m["filter"] = filter_text(config.filter);
  m["filtered_graph"] = counts_json(counts_of(prepared.graph));
  m["seeds"] = config.sample.seeds;
  m["seeds_generated"] = config.seeds_generated;
  std::vector<std::string> labels;
  for (const auto& p : config.predictors) labels.push_back(p.label());
  m["predictors"] = labels;
  m["comparison"] = config.comparison.kind == ComparisonMode::Kind::exact ? "exact" : "sampled";
  m["samples"] = samples;
  m["files"] = files;
  {
    auto f = open_out(config.out_dir / "manifest.json");
    f << m.dump(2) << '\n';
  }

  write_reports_csv(reports, out, false);
  const bool any_ok = std::any_of(reports.begin(), reports.end(), [](const auto& r) { return !r.error; });
  return any_ok ? 0 : 1;
}

int cmd_residual_curve(RunConfig config, std::ostream& out, std::ostream& log) {
  ensure_seeds(config);
  if (config.sample.fractions.empty()) throw ConfigError("residual-curve needs a fraction grid");
  config.validate();
  const auto prepared = prepare_graph(config, log);
  const auto total = prepared.graph.n_checkins();
  ensure_dir(config.out_dir);
  auto f = open_out(config.out_dir / "residual_curve.csv");
  const std::vector<std::string> header = {"fraction", "seed", "remaining_checkins",
                                           "filtered_checkins", "remaining_fraction"};
  csv::write_row(f, header);
  csv::write_row(out, header);
  for (auto seed : config.sample.seeds) {
    const auto curve =
        residual_checkin_curve(prepared.graph, config.sample.fractions, seed, config.sample.options);
    for (const auto& p : curve) {
      const std::vector<std::string> row = {
          detail::format_double(p.fraction), std::to_string(seed),
          std::to_string(p.remaining_checkins), std::to_string(total),
          detail::format_double(total ? static_cast<double>(p.remaining_checkins) / total : 0.0)};
      csv::write_row(f, row);
      csv::write_row(out, row);
    }
  }
  return 0;
}

int cmd_sample(RunConfig config, std::ostream& out, std::ostream& log) {
  ensure_seeds(config);
  config.validate();
  const auto prepared = prepare_graph(config, log);
  const auto dir = config.out_dir / "samples";
  ensure_dir(dir);
  for (const auto& cell : sample_cells(config)) {
    const auto sample = prepare_sample(config, prepared, cell.fraction, cell.window, cell.seed);
    const auto prov = provenance_of(cell);
    const auto name = "sample_" + mode_name(prov.mode) + "_" + slug(prov.parameter()) + "_" +
                      std::to_string(cell.seed) + ".tsv";
    save_sample(sample, prepared.graph, dir / name);
    out << (dir / name).string() << '\t' << sample.positives.size() << '\t'
        << sample.negatives.size() << '\n';
  }
  return 0;
}

int cmd_filter(const RunConfig& config, std::ostream& out, std::ostream& log) {
  if (config.dataset_path.empty()) throw ConfigError("no dataset path given");
  config.schema.validate();
  const auto prepared = prepare_graph(config, log);
  ensure_dir(config.out_dir);
  const auto path = config.out_dir / "filtered_graph.tsv";
  save_graph(prepared.graph, path);
  ordered_json j = counts_json(counts_of(prepared.graph));
  j["path"] = path.generic_string();
  j["checksum"] = hex64(prepared.checksum);
  out << j.dump() << '\n';
  return 0;
}

}  // namespace lbsn

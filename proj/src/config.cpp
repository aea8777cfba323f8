#include "lbsn/config.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>
#include <type_traits>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "text.hpp"

namespace lbsn {

namespace {

namespace pt = boost::property_tree;

Timestamp parse_bound(std::string_view text) {
  text = detail::trim(text);
  if (text.size() == 10 && text[4] == '-' && text[7] == '-') {
    return parse_timestamp(std::string(text) + "T00:00:00Z");
  }
  return parse_timestamp(text);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  bool ok = false;
  if constexpr (std::is_floating_point_v<T>) ok = detail::parse_double(text, value);
  else ok = detail::parse_integer(text, value);
  if (!ok) throw ConfigError("bad value for " + std::string(key) + ": '" + std::string(text) + "'");
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  text = detail::trim(text);
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("bad boolean for " + std::string(key));
}

std::optional<std::string> get(const pt::ptree& tree, const std::string& path) {
  if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(path, '/'))) {
    return std::string(detail::trim(*v));
  }
  return std::nullopt;
}

void reject_unknown(const pt::ptree& tree) {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> known = {
      {"dataset",
       {"path", "on_error", "schema", "user_col", "venue_col", "category_col", "lat_col",
        "lon_col", "time_col", "n_columns"}},
      {"filter", {"min_degree", "dominance", "degree"}},
      {"sample", {"fractions", "windows", "seeds", "max_positives", "negative_ratio", "nested"}},
      {"predictors", {"methods"}},
      {"evaluation", {"comparison", "draws", "comparison_seed", "workers"}},
      {"output", {"dir", "cache"}},
  };
  for (const auto& [section, body] : tree) {
    auto it = std::find_if(known.begin(), known.end(),
                           [&](const auto& k) { return k.first == section; });
    if (it == known.end()) throw ConfigError("unknown config section [" + section + "]");
    for (const auto& [key, value] : body) {
      if (std::find(it->second.begin(), it->second.end(), key) == it->second.end()) {
        throw ConfigError("unknown key '" + key + "' in [" + section + "]");
      }
    }
  }
}

}  // namespace

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  int depth = 0;
  std::string current;
  auto flush = [&] {
    auto t = detail::trim(current);
    if (!t.empty()) out.emplace_back(t);
    current.clear();
  };
  for (char c : text) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      flush();
    } else {
      current += c;
    }
  }
  flush();
  return out;
}

TimeWindow parse_window(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos || text.find(':', colon + 1) != std::string_view::npos) {
    throw ConfigError("window must look like START:END, got '" + std::string(text) + "'");
  }
  TimeWindow w;
  try {
    w.start = parse_bound(text.substr(0, colon));
    w.end = parse_bound(text.substr(colon + 1));
  } catch (const ParseError& e) {
    throw ConfigError(std::string("bad window bound: ") + e.what());
  }
  if (!(w.start < w.end)) throw ConfigError("window start must precede its end");
  return w;
}

RunConfig default_run_config() {
  RunConfig c;
  c.sample.fractions = {0.05, 0.10, 0.15, 0.20, 0.25, 0.30};
  for (auto m : {Method::grm, Method::assort, Method::cf, Method::nbi}) {
    PredictorConfig p;
    p.method = m;
    c.predictors.push_back(p);
  }
  return c;
}

RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  reject_unknown(tree);
  RunConfig c = default_run_config();

  if (auto v = get(tree, "dataset/path")) {
    std::filesystem::path p(*v);
    c.dataset_path = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  }
  if (auto v = get(tree, "dataset/on_error")) {
    if (*v == "skip") c.on_error = OnError::skip;
    else if (*v == "abort") c.on_error = OnError::abort;
    else throw ConfigError("on_error must be skip or abort");
  }
  if (auto v = get(tree, "dataset/schema")) {
    if (*v == "tsmc") c.schema = Schema{};
    else if (*v == "identity") c.schema = Schema::identity();
    else throw ConfigError("schema must be tsmc or identity");
  }
  const std::pair<const char*, std::size_t Schema::*> columns[] = {
      {"dataset/user_col", &Schema::user},         {"dataset/venue_col", &Schema::venue},
      {"dataset/category_col", &Schema::category}, {"dataset/lat_col", &Schema::latitude},
      {"dataset/lon_col", &Schema::longitude},     {"dataset/time_col", &Schema::timestamp},
      {"dataset/n_columns", &Schema::n_columns}};
  for (const auto& [key, field] : columns) {
    if (auto v = get(tree, key)) c.schema.*field = parse_number<std::size_t>(key, *v);
  }

  if (auto v = get(tree, "filter/min_degree")) {
    c.filter.min_degree = parse_number<std::size_t>("min_degree", *v);
  }
  if (auto v = get(tree, "filter/dominance")) c.filter.dominance = parse_number<double>("dominance", *v);
  if (auto v = get(tree, "filter/degree")) {
    if (*v == "weighted") c.filter.measure = DegreeMeasure::weighted;
    else if (*v == "binary") c.filter.measure = DegreeMeasure::binary;
    else throw ConfigError("degree must be weighted or binary");
  }

  if (auto v = get(tree, "sample/fractions")) {
    c.sample.fractions.clear();
    for (const auto& f : split_list(*v)) c.sample.fractions.push_back(parse_number<double>("fractions", f));
  }
  if (auto v = get(tree, "sample/windows")) {
    for (const auto& w : split_list(*v)) c.sample.windows.push_back(parse_window(w));
    if (!get(tree, "sample/fractions")) c.sample.fractions.clear();
  }
  if (auto v = get(tree, "sample/seeds")) {
    for (const auto& s : split_list(*v)) c.sample.seeds.push_back(parse_number<std::uint64_t>("seeds", s));
  }
  if (auto v = get(tree, "sample/max_positives")) {
    c.sample.max_positives = parse_number<std::size_t>("max_positives", *v);
  }
  if (auto v = get(tree, "sample/negative_ratio")) {
    c.sample.options.negative_ratio = parse_number<double>("negative_ratio", *v);
  }
  if (auto v = get(tree, "sample/nested")) c.sample.options.nested = parse_bool("nested", *v);

  if (auto v = get(tree, "predictors/methods")) {
    c.predictors.clear();
    for (const auto& m : split_list(*v)) c.predictors.push_back(PredictorConfig::parse(m));
  }

  if (auto v = get(tree, "evaluation/comparison")) {
    if (*v == "exact") c.comparison.kind = ComparisonMode::Kind::exact;
    else if (*v == "sampled") c.comparison.kind = ComparisonMode::Kind::sampled;
    else throw ConfigError("comparison must be exact or sampled");
  }
  if (auto v = get(tree, "evaluation/draws")) c.comparison.n_draws = parse_number<std::uint64_t>("draws", *v);
  if (auto v = get(tree, "evaluation/comparison_seed")) {
    c.comparison.seed = parse_number<std::uint64_t>("comparison_seed", *v);
  }
  if (auto v = get(tree, "evaluation/workers")) c.workers = parse_number<unsigned>("workers", *v);

  if (auto v = get(tree, "output/dir")) {
    std::filesystem::path p(*v);
    c.out_dir = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  }
  if (auto v = get(tree, "output/cache")) c.use_cache = parse_bool("cache", *v);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return parse_run_config(in, path.parent_path());
}

void RunConfig::validate() const {
  if (dataset_path.empty()) throw ConfigError("no dataset path given");
  schema.validate();
  if (!(filter.dominance > 0.0 && filter.dominance <= 1.0)) {
    throw ConfigError("dominance must lie in (0, 1]");
  }
  if (sample.fractions.empty() && sample.windows.empty()) {
    throw ConfigError("at least one sample spec (fraction or window) is required");
  }
  for (double f : sample.fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw ConfigError("fractions must lie in (0, 1]");
  }
  for (const auto& w : sample.windows) {
    if (!(w.start < w.end)) throw ConfigError("window start must precede its end");
  }
  if (!(sample.options.negative_ratio > 0.0)) throw ConfigError("negative_ratio must be positive");
  if (predictors.empty()) throw ConfigError("at least one predictor is required");
  for (const auto& p : predictors) p.validate();
  if (comparison.kind == ComparisonMode::Kind::sampled && comparison.n_draws == 0) {
    throw ConfigError("sampled comparison needs draws > 0");
  }
  if (workers == 0) throw ConfigError("workers must be >= 1");
}

std::string RunConfig::canonical() const {
  std::ostringstream s;
  s << "dataset=" << dataset_path.generic_string() << '\n'
    << "schema=" << schema.user << ',' << schema.venue << ',' << schema.category << ','
    << schema.latitude << ',' << schema.longitude << ',' << schema.timestamp << ','
    << schema.n_columns << '\n'
    << "on_error=" << (on_error == OnError::skip ? "skip" : "abort") << '\n'
    << "filter=" << filter.min_degree << ',' << detail::format_double(filter.dominance) << ','
    << (filter.measure == DegreeMeasure::weighted ? "weighted" : "binary") << '\n'
    << "fractions=";
  for (double f : sample.fractions) s << detail::format_double(f) << ';';
  s << "\nwindows=";
  for (const auto& w : sample.windows) s << w.start << ':' << w.end << ';';
  s << "\nseeds=";
  for (auto seed : sample.seeds) s << seed << ';';
  s << "\nmax_positives=" << (sample.max_positives ? std::to_string(*sample.max_positives) : "")
    << "\nnegative_ratio=" << detail::format_double(sample.options.negative_ratio)
    << "\nnested=" << sample.options.nested << "\npredictors=";
  for (const auto& p : predictors) s << p.label() << ';';
  s << "\ncomparison="
    << (comparison.kind == ComparisonMode::Kind::exact
            ? std::string("exact")
            : "sampled," + std::to_string(comparison.n_draws) + "," + std::to_string(comparison.seed))
    << '\n';
  return s.str();
}

void ensure_seeds(RunConfig& config) {
  if (!config.sample.seeds.empty()) return;
  std::random_device rd;
  const auto seed = (static_cast<std::uint64_t>(rd()) << 32) | rd();
  config.sample.seeds.push_back(seed);
  config.seeds_generated = true;
}

}  // namespace lbsn

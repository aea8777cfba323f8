#include "lbsn/graph_io.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>

#include "lbsn/hash.hpp"
#include "text.hpp"

namespace lbsn {

namespace {

constexpr std::string_view kHeader = "user\tvenue\tcount\tcategory\tlat\tlon\ttimes";

void write_meta(std::ostream& out, const VenueMeta& meta) {
  out << meta.category << '\t';
  if (meta.location) {
    out << detail::format_double(meta.location->latitude) << '\t'
        << detail::format_double(meta.location->longitude);
  } else {
    out << '\t';
  }
}

VenueMeta read_meta(std::string_view category, std::string_view lat, std::string_view lon,
                    std::size_t line_no) {
  VenueMeta meta{std::string(category), std::nullopt};
  if (lat.empty() && lon.empty()) return meta;
  GeoPoint p;
  if (!detail::parse_double(lat, p.latitude) || !detail::parse_double(lon, p.longitude)) {
    throw Error("graph line " + std::to_string(line_no) + ": bad coordinates");
  }
  meta.location = p;
  return meta;
}

}  // namespace

void write_graph_tsv(const BipartiteGraph& g, std::ostream& out) {
  out << kHeader << '\n';
  std::vector<bool> venue_written(g.n_venues(), false);
  for (std::size_t u = 0; u < g.n_users(); ++u) {
    const auto& uid = g.user_id(user_at(u));
    const auto links = g.venues_of(user_at(u));
    if (links.empty()) {
      out << uid << "\t\t\t\t\t\t\n";
      continue;
    }
    for (const auto& l : links) {
      out << uid << '\t' << g.venue_id(l.venue) << '\t' << l.count() << '\t';
      write_meta(out, g.venue_meta(l.venue));
      out << '\t';
      for (std::size_t i = 0; i < l.times.size(); ++i) {
        if (i) out << ',';
        out << l.times[i];
      }
      out << '\n';
      venue_written[idx(l.venue)] = true;
    }
  }
  for (std::size_t v = 0; v < g.n_venues(); ++v) {
    if (venue_written[v]) continue;
    out << '\t' << g.venue_id(venue_at(v)) << "\t\t";
    write_meta(out, g.venue_meta(venue_at(v)));
    out << "\t\n";
  }
}

BipartiteGraph read_graph_tsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != kHeader) {
    throw Error("graph file lacks the expected header");
  }
  GraphParts parts;
  std::unordered_map<std::string, std::size_t> users, venues;
  auto user_pos = [&](std::string_view id) {
    auto [it, fresh] = users.try_emplace(std::string(id), parts.user_ids.size());
    if (fresh) parts.user_ids.emplace_back(id);
    return it->second;
  };
  auto venue_pos = [&](std::string_view id, VenueMeta meta) {
    auto [it, fresh] = venues.try_emplace(std::string(id), parts.venue_ids.size());
    if (fresh) {
      parts.venue_ids.emplace_back(id);
      parts.venue_meta.push_back(std::move(meta));
    }
    return it->second;
  };

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = detail::split(line, '\t');
    if (f.size() != 7) {
      throw Error("graph line " + std::to_string(line_no) + ": expected 7 columns");
    }
    if (f[0].empty() && f[1].empty()) {
      throw Error("graph line " + std::to_string(line_no) + ": no user or venue");
    }
    if (f[1].empty()) {
      user_pos(f[0]);
      continue;
    }
    auto meta = read_meta(f[3], f[4], f[5], line_no);
    const auto v = venue_pos(f[1], std::move(meta));
    if (f[0].empty()) continue;
    const auto u = user_pos(f[0]);

    GraphParts::Edge e{u, v, {}};
    for (auto t : detail::split(f[6], ',')) {
      Timestamp ts = 0;
      if (!detail::parse_integer(t, ts)) {
        throw Error("graph line " + std::to_string(line_no) + ": bad timestamp list");
      }
      e.times.push_back(ts);
    }
    std::size_t count = 0;
    if (!detail::parse_integer(f[2], count) || count != e.times.size()) {
      throw Error("graph line " + std::to_string(line_no) + ": count does not match times");
    }
    parts.edges.push_back(std::move(e));
  }
  auto g = BipartiteGraph::from_parts(std::move(parts));
  g.check_invariants();
  return g;
}

void save_graph(const BipartiteGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_graph_tsv(g, out);
  if (!out) throw IoError("write failure: " + path.string());
}

BipartiteGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_graph_tsv(in);
}

std::uint64_t graph_checksum(const BipartiteGraph& g) {
  std::ostringstream out;
  write_graph_tsv(g, out);
  return fnv1a(out.str());
}

}  // namespace lbsn

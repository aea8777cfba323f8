#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "lbsn/graph.hpp"

namespace lbsn {

/// Edge-list TSV with header
///   user  venue  count  category  lat  lon  times
/// `times` is a comma-separated list of epoch seconds. Rows with an empty
/// venue declare users without edges; rows with an empty user declare venues
/// without edges. Reading a written graph yields an equal graph.
void write_graph_tsv(const BipartiteGraph& g, std::ostream& out);
BipartiteGraph read_graph_tsv(std::istream& in);

void save_graph(const BipartiteGraph& g, const std::filesystem::path& path);
BipartiteGraph load_graph(const std::filesystem::path& path);

/// FNV-1a 64 over the TSV serialization.
std::uint64_t graph_checksum(const BipartiteGraph& g);

}  // namespace lbsn

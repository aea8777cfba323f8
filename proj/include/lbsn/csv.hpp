#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "lbsn/error.hpp"

namespace lbsn::csv {

/// RFC 4180 quoting: fields holding a comma, quote, CR or LF are quoted.
std::string escape(std::string_view field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Strict reader: rejects stray quotes, unterminated quotes and rows whose
/// width differs from the first row. Accepts LF or CRLF line ends.
std::vector<std::vector<std::string>> read(std::istream& in);
std::vector<std::vector<std::string>> read(std::string_view text);

}  // namespace lbsn::csv

#include "lbsn/csv.hpp"

#include <istream>
#include <iterator>
#include <ostream>

namespace lbsn::csv {

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

std::vector<std::vector<std::string>> read(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  std::size_t line = 1;
  auto fail = [&](const char* why) {
    return Error("csv line " + std::to_string(line) + ": " + why);
  };
  auto end_row = [&] {
    row.push_back(std::move(field));
    field.clear();
    if (!rows.empty() && row.size() != rows.front().size()) throw fail("inconsistent column count");
    rows.push_back(std::move(row));
    row.clear();
  };

  std::size_t i = 0;
  bool at_field_start = true;
  while (i < text.size()) {
    const char c = text[i];
    if (at_field_start && c == '"') {
      ++i;
      while (true) {
        if (i >= text.size()) throw fail("unterminated quoted field");
        if (text[i] == '"') {
          if (i + 1 < text.size() && text[i + 1] == '"') {
            field += '"';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        if (text[i] == '\n') ++line;
        field += text[i++];
      }
      if (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
        throw fail("characters after closing quote");
      }
      at_field_start = false;
      continue;
    }
    if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      at_field_start = true;
      ++i;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r') {
        if (i + 1 >= text.size() || text[i + 1] != '\n') throw fail("bare carriage return");
        ++i;
      }
      ++i;
      end_row();
      ++line;
      at_field_start = true;
    } else if (c == '"') {
      throw fail("quote inside unquoted field");
    } else {
      field += c;
      at_field_start = false;
      ++i;
    }
  }
  if (!at_field_start || !row.empty() || !field.empty()) end_row();
  return rows;
}

std::vector<std::vector<std::string>> read(std::istream& in) {
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return read(text);
}

}  // namespace lbsn::csv

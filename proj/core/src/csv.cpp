#include "selfpref/csv.hpp"

#include <fstream>
#include <sstream>

#include "selfpref/error.hpp"

namespace selfpref::csv {

std::optional<std::size_t> Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t Table::require_column(std::string_view name, std::string_view context) const {
  if (auto c = column(name)) return *c;
  throw ParseError(std::string(context) + ": missing required column '" + std::string(name) + "'");
}

Table parse(std::string_view text, std::string_view source_name) {
  Table table;
  std::size_t pos = 0;
  std::size_t line = 1;

  // Skip a UTF-8 BOM and leading comment lines.
  if (text.substr(0, 3) == "\xEF\xBB\xBF") pos = 3;
  while (pos < text.size() && text[pos] == '#') {
    const auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      pos = text.size();
    } else {
      pos = nl + 1;
      ++line;
    }
  }

  bool have_header = false;
  while (pos < text.size()) {
    Row row;
    row.line = line;
    std::string field;
    bool in_quotes = false;
    bool field_was_quoted = false;
    bool end_of_record = false;
    while (!end_of_record) {
      if (pos >= text.size()) {
        if (in_quotes) {
          throw ParseError(std::string(source_name) + ":" + std::to_string(row.line) +
                           ": unterminated quoted field");
        }
        row.fields.push_back(std::move(field));
        break;
      }
      const char c = text[pos];
      if (in_quotes) {
        if (c == '"') {
          if (pos + 1 < text.size() && text[pos + 1] == '"') {
            field.push_back('"');
            pos += 2;
          } else {
            in_quotes = false;
            ++pos;
          }
        } else {
          if (c == '\n') ++line;
          field.push_back(c);
          ++pos;
        }
        continue;
      }
      switch (c) {
        case '"':
          if (!field.empty() || field_was_quoted) {
            throw ParseError(std::string(source_name) + ":" + std::to_string(line) +
                             ": stray quote inside unquoted field");
          }
          in_quotes = true;
          field_was_quoted = true;
          ++pos;
          break;
        case ',':
          row.fields.push_back(std::move(field));
          field.clear();
          field_was_quoted = false;
          ++pos;
          break;
        case '\r':
          ++pos;
          break;
        case '\n':
          row.fields.push_back(std::move(field));
          ++pos;
          ++line;
          end_of_record = true;
          break;
        default:
          if (field_was_quoted) {
            throw ParseError(std::string(source_name) + ":" + std::to_string(line) +
                             ": text after closing quote");
          }
          field.push_back(c);
          ++pos;
      }
    }
    const bool blank = row.fields.size() == 1 && row.fields[0].empty();
    if (blank) continue;
    if (!have_header) {
      table.header = std::move(row.fields);
      have_header = true;
      continue;
    }
    if (row.fields.size() != table.header.size()) {
      throw ParseError(std::string(source_name) + ":" + std::to_string(row.line) + ": expected " +
                       std::to_string(table.header.size()) + " fields, found " +
                       std::to_string(row.fields.size()));
    }
    table.rows.push_back(std::move(row));
  }
  if (!have_header) throw ParseError(std::string(source_name) + ": empty CSV (no header)");
  return table;
}

Table read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

std::string escape(std::string_view field) {
  const bool needs_quotes = field.find_first_of(",\"\n\r") != std::string_view::npos;
  if (!needs_quotes) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string join_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += escape(fields[i]);
  }
  return out;
}

}  // namespace selfpref::csv

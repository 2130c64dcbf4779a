#include "difnet/csv.hpp"

#include <charconv>
#include <limits>
#include <fstream>
#include <sstream>
#include <system_error>

#include "difnet/error.hpp"

namespace difnet::csv {

std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) throw Error(ErrorCode::parse_error, "cannot format value");
  return std::string(buf, end);
}

std::string metadata_block(const std::map<std::string, std::string>& metadata) {
  std::string out;
  for (const auto& [key, value] : metadata) out += "# " + key + "=" + value + "\n";
  return out;
}

namespace {

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    fields.emplace_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

}  // namespace

Table parse(std::string_view text) {
  Table t;
  std::size_t pos = 0;
  bool have_header = false;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    auto line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() : eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line.front() == '#') {
      line.remove_prefix(1);
      while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
      auto eq = line.find('=');
      if (eq == std::string_view::npos) continue;
      t.metadata[std::string(line.substr(0, eq))] = std::string(line.substr(eq + 1));
      continue;
    }
    auto fields = split(line);
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
    } else {
      if (fields.size() != t.header.size())
        throw Error(ErrorCode::parse_error, "row " + std::to_string(t.rows.size() + 1) + " has " +
                                                std::to_string(fields.size()) + " fields, expected " +
                                                std::to_string(t.header.size()));
      t.rows.push_back(std::move(fields));
    }
  }
  if (!have_header) throw Error(ErrorCode::parse_error, "missing header line");
  return t;
}

void expect_header(const Table& t, const std::vector<std::string>& expected) {
  if (t.header == expected) return;
  std::string want;
  for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
  throw Error(ErrorCode::parse_error, "unexpected header, want '" + want + "'");
}

double to_double(const std::string& field) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    // from_chars rejects "inf"/"-inf" spellings produced by some writers
    if (field == "-inf") return -std::numeric_limits<double>::infinity();
    if (field == "inf") return std::numeric_limits<double>::infinity();
    throw Error(ErrorCode::parse_error, "not a number: '" + field + "'");
  }
  return value;
}

std::size_t to_size(const std::string& field) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    throw Error(ErrorCode::parse_error, "not an index: '" + field + "'");
  return value;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::parse_error, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::parse_error, "cannot write " + path);
  out << contents;
}

}  // namespace difnet::csv

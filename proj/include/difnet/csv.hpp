#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace difnet::csv {

/// Shortest round-trippable decimal form of `x`.
std::string format_double(double x);

/// Writes `# key=value` lines in key order.
std::string metadata_block(const std::map<std::string, std::string>& metadata);

struct Table {
  std::map<std::string, std::string> metadata;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Parses `#` metadata lines, one header line and comma-separated rows.
/// Throws Error{parse_error} on ragged rows.
Table parse(std::string_view text);

/// Header must equal `expected` exactly; throws Error{parse_error} otherwise.
void expect_header(const Table& t, const std::vector<std::string>& expected);

double to_double(const std::string& field);
std::size_t to_size(const std::string& field);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace difnet::csv

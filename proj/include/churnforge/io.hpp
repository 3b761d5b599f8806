#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace churnforge {

// Reads a whole file; transparently inflates gzip (magic 1f 8b).
std::string read_file(const std::string& path);

void write_file(const std::string& path, const std::string& content);

// Splits one CSV line. No quoting support: the toolkit's own formats never
// quote, and player ids are required to be comma-free.
std::vector<std::string> split_csv_line(const std::string& line);

// Splits text into lines, tolerating trailing newline and CRLF.
std::vector<std::string> split_lines(const std::string& text);

// Currency as integer cents, exact under addition.
std::int64_t parse_cents(const std::string& s);
std::string format_cents(std::int64_t cents);

}  // namespace churnforge

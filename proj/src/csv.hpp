#pragma once

// Minimal RFC 4180 reader/writer: comma separated, double-quoted fields with
// "" escapes, LF or CRLF line endings.

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dipt::csv {

struct Row {
  std::size_t line = 0;  // 1-based physical line of the record start
  std::vector<std::string> fields;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}
  // nullopt at end of input; throws std::runtime_error on an unterminated quote.
  std::optional<Row> next();

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

std::string escape(std::string_view field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

// Shortest text that parses back to the same double.
std::string format_double(double v);
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);
std::optional<bool> parse_bool(std::string_view s);

}  // namespace dipt::csv

#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>

namespace kdimer {

// Round-trip float64 text (17 significant digits); NaN becomes an empty field.
std::string format_double(double x);

// Minimal RFC-4180 writer: comma separated, CRLF row terminators, fields quoted
// only when they contain a comma, quote, or newline.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void header(std::initializer_list<std::string_view> names);
  CsvWriter& field(std::string_view text);
  CsvWriter& field(double value);
  CsvWriter& field(long long value);
  CsvWriter& field(int value) { return field(static_cast<long long>(value)); }
  void end_row();

 private:
  std::ostream& out_;
  bool first_ = true;
};

}  // namespace kdimer

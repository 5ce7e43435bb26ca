#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace pxt::csv {

struct Row {
  std::size_t line = 0;  // 1-based line on which the record starts
  std::vector<std::string> fields;
};

/// RFC-4180 reader: comma-delimited, double-quote quoting with "" escapes,
/// CRLF or LF terminators, quoted fields may span lines. A UTF-8 BOM on the
/// first record is dropped. Throws MalformedRecord on an unterminated quote or
/// stray characters after a closing quote.
std::vector<Row> parse(std::string_view text, const std::string& source_name = "<csv>");

std::string quote(std::string_view field);
std::string format_row(const std::vector<std::string>& fields);

}  // namespace pxt::csv

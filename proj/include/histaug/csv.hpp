// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace histaug::csv {

/// Splits one RFC 4180 record. Quoted fields may contain commas and doubled
/// quotes; embedded newlines are not supported. Throws DataError on an
/// unterminated quote.
std::vector<std::string> split_line(std::string_view line);

/// Quotes a field when it contains a comma, quote or leading/trailing space.
std::string escape(std::string_view field);

/// Reads a table whose first line must equal `header` exactly. Blank lines are
/// skipped. Each row is returned with its 1-based line number.
struct Row {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

std::vector<Row> read_table(std::istream& in, const std::vector<std::string>& header,
                            const std::string& source);

}  // namespace histaug::csv

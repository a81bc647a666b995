//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SOLVFLOW_CSV_H_
#define SOLVFLOW_CSV_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace solvflow::csv {

using Row = std::vector<std::string>;

// RFC 4180 subset: comma separated, double-quoted fields with "" escapes,
// LF or CRLF line ends, optional UTF-8 BOM. Blank lines are skipped.
std::vector<Row> parse(std::string_view text);
std::vector<Row> read_file(const std::filesystem::path &path);

// Quotes a field only when it contains a comma, quote or newline.
std::string escape(std::string_view field);
std::string join(const Row &row);

std::string trim(std::string_view s);

// Full-string numeric parse; false on trailing garbage or empty input.
bool parse_double(std::string_view s, double &out);

}  // namespace solvflow::csv

#endif  // SOLVFLOW_CSV_H_

// Copyright 2026 The admitaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ADMITAUDIT_CSV_H_
#define ADMITAUDIT_CSV_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace admitaudit::csv {

// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);
std::string format_optional(const std::optional<double>& value);

// Quotes a cell when it contains a delimiter, quote, or line break.
std::string escape(std::string_view cell);

void write_row(std::ostream& out, const std::vector<std::string>& cells);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of `column` in the header; throws if absent.
  std::size_t column(std::string_view name) const;
  std::optional<std::size_t> find_column(std::string_view name) const;
};

// RFC 4180 reader. Rows may be ragged; callers validate widths.
Table parse(std::string_view text);
Table read_file(const std::filesystem::path& path);

// Writes `text` to `path`, creating parent directories.
void write_file(const std::filesystem::path& path, std::string_view text);

// Strict numeric parsing helpers used by readers. They throw std::invalid_argument.
double parse_double(std::string_view text);
long long parse_int(std::string_view text);

}  // namespace admitaudit::csv

#endif  // ADMITAUDIT_CSV_H_

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace surveysim::csv {

using Row = std::vector<std::string>;

/// Parses comma-separated text with RFC 4180 quoting. Quoted fields may span
/// lines. A trailing newline does not produce an empty row; blank lines are
/// returned as rows with a single empty field so callers can report them.
/// Throws ParseError on an unterminated quote.
[[nodiscard]] std::vector<Row> parse(std::string_view text);

/// Quotes a field if it contains a comma, quote, CR or LF.
[[nodiscard]] std::string escape(std::string_view field);

[[nodiscard]] std::string format_row(const Row& row);

}  // namespace surveysim::csv

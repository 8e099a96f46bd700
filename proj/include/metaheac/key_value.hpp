// Copyright 2026 The metaheac Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace metaheac {

/// One `key = value` line. `line` is 1-based for error messages.
struct KeyValue {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

/// Parses flat `key = value` text. Blank lines and lines starting with '#'
/// are skipped; surrounding whitespace is trimmed. Keys may repeat.
std::vector<KeyValue> parse_key_values(std::istream& in, std::string_view source);
std::vector<KeyValue> read_key_value_file(const std::filesystem::path& path);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

// Strict conversions; throw ConfigError mentioning `what` on bad input.
double parse_double(std::string_view text, std::string_view what);
std::uint64_t parse_uint(std::string_view text, std::string_view what);
bool parse_bool(std::string_view text, std::string_view what);

/// Shortest text that parses back to the identical double.
std::string format_double(double v);

}  // namespace metaheac

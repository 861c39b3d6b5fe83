#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace divrec {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::vector<std::string> split_str(std::string_view s, std::string_view sep);

// One CSV record, RFC4180-style quoting (titles contain commas).
std::vector<std::string> split_csv_row(std::string_view line);

// Levenshtein distance, capped: returns min(distance, cap + 1).
size_t edit_distance_capped(std::string_view a, std::string_view b, size_t cap);

bool starts_with(std::string_view s, std::string_view prefix);
std::string replace_all(std::string s, std::string_view from, std::string_view to);

} // namespace divrec

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cbai::text {

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool icontains(std::string_view haystack, std::string_view needle);
bool starts_with_word(std::string_view s, std::string_view word);

// Splits on every occurrence of sep; empty pieces are kept.
std::vector<std::string> split(std::string_view s, std::string_view sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Lowercased alphanumeric/apostrophe runs.
std::vector<std::string> words(std::string_view s);

}  // namespace cbai::text

#pragma once
// Text utilities: key normalization, number formatting, slot filling and
// delimited-table parsing.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace cft {

std::string trim(std::string_view s);
std::string lower_ascii(std::string_view s);

// Best-effort removal of Latin diacritics from UTF-8 text (é -> e, ß -> ss).
// Unknown multibyte sequences are passed through unchanged.
std::string strip_diacritics(std::string_view s);

// trim + casefold + diacritic strip; the join key for table merges.
std::string normalize_key(std::string_view s);

// 1234567 -> "1,234,567"
std::string format_thousands(int64_t v);

// Fixed precision without locale surprises: format_fixed(17.5, 1) == "17.5".
std::string format_fixed(double v, int precision);

// Replaces {slot} occurrences; throws ConfigError on slots without a binding.
// "{{" renders a literal brace.
std::string fill_slots(std::string_view tmpl, const std::map<std::string, std::string>& slots);

struct TableRow {
    std::vector<std::string> fields;
};

// Delimiter-separated values with optional double-quote escaping. Returns all
// rows including the header; callers decide what the header means.
std::vector<TableRow> parse_delimited(std::string_view text, char delimiter);

} // namespace cft

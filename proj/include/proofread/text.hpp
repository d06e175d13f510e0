#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// Small byte-level text helpers shared by every module. All case folding is
// ASCII-only; non-ASCII bytes pass through untouched.
namespace proofread::text {

bool is_valid_utf8(std::string_view s);

// Byte offsets of every code point start, plus s.size() as a sentinel.
std::vector<std::size_t> codepoint_offsets(std::string_view s);

inline bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// ASCII punctuation only. Bytes >= 0x80 are word characters.
bool is_punct(char c);

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);
std::string collapse_whitespace(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool starts_with_upper(std::string_view s);
std::string capitalize_first(std::string_view s);
std::string lowercase_first(std::string_view s);

std::string sha256_hex(std::string_view data);

}  // namespace proofread::text

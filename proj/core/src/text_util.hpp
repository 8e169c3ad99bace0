#pragma once

// Small string helpers used across the core library. Not installed.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace camf::detail {

/// Matches the regex class \s: space, \t, \n, \v, \f, \r.
constexpr bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\v' || c == '\f' || c == '\r';
}

constexpr bool is_word_char(char c) noexcept {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

constexpr char ascii_upper(char c) noexcept {
  return (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c;
}

bool is_blank(std::string_view s) noexcept;
std::string_view trim(std::string_view s) noexcept;
std::string_view ltrim(std::string_view s) noexcept;

/// Splits on '\n'. A trailing '\r' is left in place.
std::vector<std::string_view> split_lines(std::string_view s);

/// Case-insensitive (ASCII) prefix test.
bool istarts_with(std::string_view s, std::string_view prefix) noexcept;

/// CRLF and lone CR become LF.
std::string normalize_newlines(std::string_view s);

/// Number of UTF-8 code points (invalid bytes count as one each).
std::size_t utf8_length(std::string_view s) noexcept;

/// Cuts `s` to at most `max_code_points` code points and appends `marker`
/// when anything was removed. Never splits a multi-byte sequence.
std::string utf8_truncate(std::string_view s, std::size_t max_code_points,
                          std::string_view marker);

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

std::string to_lower(std::string_view s);

}  // namespace camf::detail

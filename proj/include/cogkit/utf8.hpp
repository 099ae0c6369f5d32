#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cogkit {

/// Decodes UTF-8 into a sequence of Unicode scalar values.
/// Throws ParseError on malformed input (truncated or overlong sequences,
/// surrogates, values above U+10FFFF).
std::u32string utf8_decode(std::string_view text);

/// Encodes a sequence of Unicode scalar values as UTF-8.
std::string utf8_encode(std::u32string_view text);

std::string utf8_encode(char32_t cp);

/// Number of Unicode scalar values in a UTF-8 string.
std::size_t codepoint_length(std::string_view text);

/// Strips ASCII whitespace from both ends.
std::string_view trim(std::string_view text);

/// Splits on runs of ASCII whitespace; no empty tokens.
std::vector<std::string_view> split_whitespace(std::string_view text);

}  // namespace cogkit

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace morphpipe::utf8 {

struct CodePoint {
  char32_t value;
  std::uint8_t length;  // bytes consumed, >= 1 even for invalid input
};

// Decodes the code point starting at byte `pos`. Invalid sequences decode
// as U+FFFD with length 1 so that byte offsets always advance.
CodePoint decode_at(std::string_view text, std::size_t pos);

// Byte length of the last code point ending at `end` (exclusive).
std::size_t last_length(std::string_view text, std::size_t end);

std::u32string decode(std::string_view text);
std::string encode(std::u32string_view text);
void append(std::string& out, char32_t cp);

std::size_t length(std::string_view text);

// Simple one-to-one case mappings for Latin, Greek and Cyrillic.
char32_t to_lower(char32_t cp);
char32_t to_upper(char32_t cp);
bool is_upper(char32_t cp);
bool is_lower(char32_t cp);
bool is_digit(char32_t cp);
bool is_space(char32_t cp);

std::string to_lower(std::string_view text);
std::u32string to_lower(std::u32string_view text);

// Lowercases only the first code point.
std::string lower_first(std::string_view text);

// First and last `count` code points of `text` (whole text when shorter).
std::string prefix(std::string_view text, std::size_t count);
std::string suffix(std::string_view text, std::size_t count);

}  // namespace morphpipe::utf8

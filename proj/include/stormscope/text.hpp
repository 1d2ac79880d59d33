#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace stormscope::text {

struct CodePoint {
  char32_t value;
  std::size_t offset; // byte offset in the source string
  std::size_t length; // byte length of the encoded code point
};

/// Decodes UTF-8; ill-formed sequences decode to U+FFFD covering the bad bytes.
std::vector<CodePoint> decode_utf8(std::string_view s);
void append_utf8(std::string& out, char32_t cp);

std::string nfc(std::string_view s);
/// Lowercase (root locale) followed by NFC.
std::string lower(std::string_view s);
std::string_view trim(std::string_view s);

bool is_word_char(char32_t cp);
bool is_upper(char32_t cp);
bool is_space(char32_t cp);
bool is_emoji_base(char32_t cp);
bool is_emoji_modifier(char32_t cp); // skin tones, VS16, keycap, tags
bool is_regional_indicator(char32_t cp);

std::vector<std::string> split(std::string_view s, char sep);

} // namespace stormscope::text

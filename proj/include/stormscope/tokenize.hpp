#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace stormscope {

struct Token {
  std::string surface;
  std::string lower;
  std::size_t begin = 0; // byte span in the source text
  std::size_t end = 0;
};

/// Half-open token index range [begin, end).
struct SentenceRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
};

struct EmojiCount {
  std::string emoji;
  std::size_t count = 0;
};

struct TokenizedText {
  std::vector<Token> tokens;
  std::vector<SentenceRange> sentences; // partitions `tokens`
  std::vector<EmojiCount> emojis;       // first-appearance order
  std::vector<std::string> hashtags;    // lowercase, including '#'
  std::size_t question_marks = 0;
  std::size_t quote_marks = 0;

  std::size_t emoji_total() const;
  std::vector<std::string> lower_tokens() const;
};

/// Word tokens exclude punctuation and emoji. Apostrophes and hyphens between
/// word characters stay inside a token; '#'/'@' directly before a word start a
/// hashtag/mention token. Sentences end at a run of . ! ? … followed by
/// whitespace or end of text, unless the preceding token is a known abbreviation.
TokenizedText tokenize(std::string_view text, std::string_view lang);

} // namespace stormscope

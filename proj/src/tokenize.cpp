#include "stormscope/tokenize.hpp"

#include <algorithm>
#include <array>

#include "stormscope/lexicon.hpp"
#include "stormscope/text.hpp"

namespace stormscope {

std::size_t TokenizedText::emoji_total() const {
  std::size_t n = 0;
  for (const auto& e : emojis) n += e.count;
  return n;
}

std::vector<std::string> TokenizedText::lower_tokens() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.lower);
  return out;
}

namespace {

constexpr char32_t kZwj = 0x200D;

bool is_apostrophe(char32_t c) { return c == '\'' || c == 0x2019; }

bool is_sentence_terminator(char32_t c) { return c == '.' || c == '!' || c == '?' || c == 0x2026; }

bool is_question_mark(char32_t c) { return c == '?' || c == 0xFF1F; }

bool is_quote_mark(char32_t c) {
  return c == '"' || c == '\'' || c == 0x201C || c == 0x201D || c == 0x201E || c == 0x00AB || c == 0x00BB;
}

bool is_closing(char32_t c) { return c == '"' || c == '\'' || c == 0x201D || c == 0x201C || c == 0x00BB || c == ')' || c == ']'; }

constexpr std::array<std::string_view, 22> kAbbreviations = {
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "vs", "no", "approx", "z",
    "bzw", "usw", "ca", "nr", "hr", "fr", "vgl", "inkl", "evtl", "bspw"};

bool is_abbreviation(const Token& tok, bool digits_are_ordinals) {
  if (std::find(kAbbreviations.begin(), kAbbreviations.end(), tok.lower) != kAbbreviations.end()) return true;
  const auto cps = text::decode_utf8(tok.lower);
  if (cps.size() == 1 && !(cps[0].value >= '0' && cps[0].value <= '9')) return true;
  if (digits_are_ordinals)
    return std::all_of(cps.begin(), cps.end(), [](const auto& c) { return c.value >= '0' && c.value <= '9'; });
  return false;
}

} // namespace

TokenizedText tokenize(std::string_view source, std::string_view lang) {
  TokenizedText out;
  const auto cps = text::decode_utf8(source);
  const bool german = primary_language(lang) == "de";
  std::size_t sentence_start = 0;

  auto close_sentence = [&] {
    if (out.tokens.size() > sentence_start) {
      out.sentences.push_back({sentence_start, out.tokens.size()});
      sentence_start = out.tokens.size();
    }
  };
  auto byte_end = [&](std::size_t i) { return i < cps.size() ? cps[i].offset : source.size(); };
  auto add_emoji = [&](std::string_view e) {
    for (auto& existing : out.emojis)
      if (existing.emoji == e) {
        ++existing.count;
        return;
      }
    out.emojis.push_back({std::string(e), 1});
  };

  std::size_t i = 0;
  while (i < cps.size()) {
    const char32_t c = cps[i].value;

    if (text::is_emoji_base(c)) {
      const std::size_t start = i++;
      if (text::is_regional_indicator(c) && i < cps.size() && text::is_regional_indicator(cps[i].value)) ++i;
      while (i < cps.size()) {
        if (text::is_emoji_modifier(cps[i].value)) {
          ++i;
        } else if (cps[i].value == kZwj && i + 1 < cps.size() && text::is_emoji_base(cps[i + 1].value)) {
          i += 2;
        } else {
          break;
        }
      }
      add_emoji(source.substr(cps[start].offset, byte_end(i) - cps[start].offset));
      continue;
    }

    const bool prefixed = (c == '#' || c == '@') && i + 1 < cps.size() && text::is_word_char(cps[i + 1].value);
    if (text::is_word_char(c) || prefixed) {
      const std::size_t start = i;
      i += prefixed ? 2 : 1;
      while (i < cps.size()) {
        const char32_t d = cps[i].value;
        if (text::is_word_char(d)) {
          ++i;
        } else if ((is_apostrophe(d) || d == '-') && i + 1 < cps.size() && text::is_word_char(cps[i + 1].value)) {
          i += 2;
        } else {
          break;
        }
      }
      Token tok;
      tok.begin = cps[start].offset;
      tok.end = byte_end(i);
      tok.surface = std::string(source.substr(tok.begin, tok.end - tok.begin));
      tok.lower = text::lower(tok.surface);
      if (c == '#') out.hashtags.push_back(tok.lower);
      out.tokens.push_back(std::move(tok));
      continue;
    }

    if (is_sentence_terminator(c)) {
      const std::size_t run_start = i;
      while (i < cps.size() && is_sentence_terminator(cps[i].value)) {
        if (is_question_mark(cps[i].value)) ++out.question_marks;
        ++i;
      }
      std::size_t look = i;
      while (look < cps.size() && is_closing(cps[look].value)) ++look;
      const bool at_break = look == cps.size() || text::is_space(cps[look].value);
      const bool single_dot = i - run_start == 1 && c == '.';
      const bool abbreviation = single_dot && !out.tokens.empty() && out.tokens.back().end == cps[run_start].offset &&
                                is_abbreviation(out.tokens.back(), german);
      if (at_break && !abbreviation) close_sentence();
      continue;
    }
    if (is_question_mark(c)) ++out.question_marks;
    if (is_quote_mark(c)) ++out.quote_marks;
    ++i;
  }
  close_sentence();
  return out;
}

} // namespace stormscope

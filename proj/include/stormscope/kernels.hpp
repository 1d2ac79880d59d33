#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "stormscope/corpus.hpp"
#include "stormscope/features.hpp"
#include "stormscope/lexicon.hpp"

// Per-message passes over a corpus. The serial versions are the reference;
// the omp versions must return identical results.
namespace stormscope::kernels {

using Tally = std::map<std::string, std::size_t>;

struct EmojiHashtagTally {
  Tally emojis;
  Tally hashtags;
  friend bool operator==(const EmojiHashtagTally&, const EmojiHashtagTally&) = default;
};

namespace serial {
std::vector<FeatureVector> extract_features(const Corpus& corpus, const LexiconSet& lexicons);
/// 1 when a message has at least one token in the toxicity lexicon.
std::vector<std::uint8_t> toxic_flags(const Corpus& corpus, const Lexicon& toxicity);
/// Uses the toxicity lexicon of each message's language; messages without one are 0.
std::vector<std::uint8_t> toxic_flags(const Corpus& corpus, const LexiconSet& lexicons);
EmojiHashtagTally emoji_hashtag_tally(const Corpus& corpus);
} // namespace serial

namespace omp {
std::vector<FeatureVector> extract_features(const Corpus& corpus, const LexiconSet& lexicons);
std::vector<std::uint8_t> toxic_flags(const Corpus& corpus, const Lexicon& toxicity);
std::vector<std::uint8_t> toxic_flags(const Corpus& corpus, const LexiconSet& lexicons);
EmojiHashtagTally emoji_hashtag_tally(const Corpus& corpus);
} // namespace omp

} // namespace stormscope::kernels

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stormscope/corpus.hpp"
#include "stormscope/lexicon.hpp"
#include "stormscope/timeline.hpp"

namespace stormscope {

struct ParticipationStats {
  std::size_t n_authors = 0;
  std::size_t n_authored_messages = 0;
  std::size_t n_without_author = 0; // excluded from the fractions
  double frac_gt1 = 0.0;            // authors with more than one message
  double frac_gt2 = 0.0;
};

/// Throws DataError when no message carries an author_id.
ParticipationStats participation_stats(const Corpus& corpus);

struct ToxicityReport {
  std::size_t n_messages = 0;
  std::size_t n_flagged = 0;
  double share = 0.0;
  std::vector<std::size_t> bin_flagged; // parallel to the series bins
  std::vector<std::size_t> bin_total;
  std::vector<double> bin_share;        // 0 for empty bins
};

/// Fraction of messages with at least one toxicity-lexicon token. 0 for an empty corpus.
double toxicity_share(const Corpus& corpus, const Lexicon& toxicity);
ToxicityReport toxicity_report(const Corpus& corpus, std::span<const std::uint8_t> flags,
                               const TimelineSeries& series);

using FrequencyTable = std::vector<std::pair<std::string, std::size_t>>;

/// Descending by count; ties by code point order of the key.
FrequencyTable emoji_table(const Corpus& corpus);
FrequencyTable hashtag_table(const Corpus& corpus);
FrequencyTable to_frequency_table(const std::map<std::string, std::size_t>& tally);

} // namespace stormscope

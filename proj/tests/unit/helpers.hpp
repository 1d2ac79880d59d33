#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stormscope/corpus.hpp"
#include "stormscope/lexicon.hpp"

namespace testing {

inline stormscope::Message msg(std::string id, std::string text, std::optional<stormscope::Stance> stance = {},
                               std::optional<std::int64_t> ts = {}) {
  stormscope::Message m;
  m.id = std::move(id);
  m.thread_id = "t";
  m.is_root = false;
  m.parent_id = "root";
  m.lang = "en";
  m.text = std::move(text);
  if (stance) m.stance = stormscope::StanceLabel{*stance, std::nullopt};
  m.timestamp = ts;
  return m;
}

// Timestamped messages, one per entry, `day` days after 2022-10-03.
inline std::int64_t day(int d, int second = 3600) { return 1664755200 + static_cast<std::int64_t>(d) * 86400 + second; }

inline const stormscope::LexiconSet& shipped_lexicons() {
  static const auto set = stormscope::LexiconSet::load_directory(STORMSCOPE_REPO_DATA "/lexicons");
  return set;
}

} // namespace testing

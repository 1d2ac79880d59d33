#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace stormscope {

enum class Platform { twitter_like, telegram_like, reddit_like };

enum class Stance { support_target, oppose_target, neutral, support_both, oppose_both, off_topic };
inline constexpr Stance kAllStances[] = {Stance::support_target, Stance::oppose_target, Stance::neutral,
                                         Stance::support_both,   Stance::oppose_both,   Stance::off_topic};

enum class Phase { begin, middle, end };
inline constexpr Phase kAllPhases[] = {Phase::begin, Phase::middle, Phase::end};

std::string_view to_string(Platform p);
std::string_view to_string(Stance s);
std::string_view to_string(Phase p);
std::optional<Platform> parse_platform(std::string_view s);
std::optional<Stance> parse_stance(std::string_view s);
std::optional<Phase> parse_phase(std::string_view s);

struct StanceLabel {
  Stance coarse = Stance::neutral;
  std::optional<std::string> sub;

  friend bool operator==(const StanceLabel&, const StanceLabel&) = default;
};

/// Seconds since the Unix epoch, UTC.
using UnixSeconds = std::int64_t;

std::optional<UnixSeconds> parse_iso8601_utc(std::string_view s);
std::string format_iso8601_utc(UnixSeconds t);

struct Message {
  std::string id;
  Platform platform = Platform::twitter_like;
  std::string thread_id;
  std::optional<std::string> parent_id;
  bool is_root = false;
  std::optional<std::string> author_id;
  std::optional<UnixSeconds> timestamp;
  std::optional<std::uint64_t> relative_order;
  std::string lang = "und";
  std::string text;
  std::optional<StanceLabel> stance;
  std::optional<Phase> phase_gold;

  friend bool operator==(const Message&, const Message&) = default;
};

struct Corpus {
  std::vector<Message> messages;
  std::map<std::string, std::string> meta;

  std::size_t size() const { return messages.size(); }
  bool empty() const { return messages.empty(); }
  bool all_timestamped() const;
  bool any_timestamped() const;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

struct ParseResult {
  Corpus corpus;
  std::size_t duplicate_count = 0;
};

/// Reads the canonical line-delimited corpus format. Blank lines are skipped.
/// Throws DataError naming the line number and field on malformed records.
ParseResult parse_corpus(std::istream& in);
ParseResult parse_corpus_file(const std::string& path);

/// Sorts by timestamp when every message has one, otherwise by relative_order
/// (stable in both cases). Idempotent. Throws DataError when no total order exists.
void normalize(Corpus& corpus);

nlohmann::ordered_json to_json(const Message& m);
void write_corpus(std::ostream& out, const Corpus& corpus);
void write_corpus_file(const std::string& path, const Corpus& corpus);

enum class ExportKind { twitter_v2_json, telegram_export_json, reddit_dump_json };
std::optional<ExportKind> parse_export_kind(std::string_view s);

struct AdaptResult {
  std::vector<Message> messages;
  /// Unmapped platform fields, parallel to `messages`.
  std::vector<nlohmann::json> side_channel;
  /// Records skipped because they carry no text (service messages, media-only posts).
  std::size_t skipped = 0;
};

AdaptResult adapt_export(std::string_view raw, ExportKind kind, std::string_view lang = "und");

struct ReplyStructure {
  std::size_t n_roots = 0;
  std::size_t n_replies_to_root = 0;
  std::size_t n_replies_to_replies = 0;
  double fraction_to_root = 0.0;
};

/// Counts how replies attach to their thread. Throws DataError listing every
/// message whose parent_id is missing from its thread.
ReplyStructure reply_structure(const Corpus& corpus);

} // namespace stormscope

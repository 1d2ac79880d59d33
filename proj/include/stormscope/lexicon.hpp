#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace stormscope {

struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
};

using TagId = std::uint16_t;

/// Term -> category tags. Terms are lowercase NFC; tags come from a per-lexicon
/// universe that is either declared with a `#! tags: a,b,c` header line or
/// collected from the entries.
class Lexicon {
public:
  Lexicon() = default;
  Lexicon(std::string name, std::string language) : name_(std::move(name)), language_(std::move(language)) {}

  const std::string& name() const { return name_; }
  const std::string& language() const { return language_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  const std::vector<std::string>& tag_universe() const { return tags_; }
  std::optional<TagId> tag_id(std::string_view tag) const;
  const std::string& tag_name(TagId id) const { return tags_.at(id); }

  /// Tag ids for an exact (already lowercased) term; empty when absent.
  std::span<const TagId> lookup(std::string_view term) const;
  bool contains(std::string_view term) const { return !lookup(term).empty(); }
  bool has_tag(std::string_view term, TagId tag) const;
  std::vector<std::string> tags(std::string_view term) const;
  std::vector<std::string> terms() const;

  /// Adds tags to a term, unioning with existing ones. Tags not yet in the
  /// universe are appended unless the universe is sealed.
  void add(std::string_view term, std::span<const std::string> tags);
  void declare_tags(std::span<const std::string> tags);

private:
  TagId intern(const std::string& tag);

  std::string name_;
  std::string language_;
  std::vector<std::string> tags_;
  bool sealed_ = false;
  std::unordered_map<std::string, std::vector<TagId>, StringHash, std::equal_to<>> entries_;
};

/// Parses "term<TAB>tag[,tag...]" lines; '#' lines are comments.
/// Throws DataError with the line number on malformed lines.
Lexicon load_lexicon(std::istream& in, std::string name = {}, std::string language = {});
Lexicon load_lexicon_file(const std::filesystem::path& path, std::string language = {});

using TagCounts = std::map<std::string, std::size_t>;

/// Counts, per tag, the tokens whose exact form carries that tag. Dense over the
/// lexicon's tag universe (unmatched tags report 0).
TagCounts match_tokens(std::span<const std::string> tokens, const Lexicon& lexicon);

enum class LexiconRole {
  emotion,
  modality,
  abstract_noun,
  state_verb,
  assertion_opinion,
  toxicity,
  pos_hint,
  negation,
  conjunction,
  pronoun,
  clause_marker,
};
inline constexpr std::size_t kLexiconRoleCount = 11;

std::string_view to_string(LexiconRole role);
std::optional<LexiconRole> parse_lexicon_role(std::string_view s);

class LexiconSet {
public:
  void set(std::string language, LexiconRole role, Lexicon lexicon);
  /// Exact language first, then its primary subtag ("en-GB" -> "en").
  const Lexicon* find(std::string_view language, LexiconRole role) const;
  std::vector<LexiconRole> missing_roles(std::string_view language) const;
  std::vector<std::string> languages() const;

  /// Loads `<dir>/<lang>/<role>.tsv` for every language subdirectory.
  static LexiconSet load_directory(const std::filesystem::path& dir);

private:
  std::map<std::pair<std::string, LexiconRole>, Lexicon, std::less<>> by_role_;
};

std::string primary_language(std::string_view tag);

} // namespace stormscope

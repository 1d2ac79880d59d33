#include "stormscope/lexicon.hpp"

#include <algorithm>
#include <fstream>

#include "stormscope/error.hpp"
#include "stormscope/text.hpp"

namespace stormscope {

std::optional<TagId> Lexicon::tag_id(std::string_view tag) const {
  for (std::size_t i = 0; i < tags_.size(); ++i)
    if (tags_[i] == tag) return static_cast<TagId>(i);
  return std::nullopt;
}

std::span<const TagId> Lexicon::lookup(std::string_view term) const {
  auto it = entries_.find(term);
  if (it == entries_.end()) return {};
  return it->second;
}

bool Lexicon::has_tag(std::string_view term, TagId tag) const {
  const auto ids = lookup(term);
  return std::find(ids.begin(), ids.end(), tag) != ids.end();
}

std::vector<std::string> Lexicon::tags(std::string_view term) const {
  std::vector<std::string> out;
  for (auto id : lookup(term)) out.push_back(tags_[id]);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> Lexicon::terms() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [term, _] : entries_) out.push_back(term);
  std::sort(out.begin(), out.end());
  return out;
}

TagId Lexicon::intern(const std::string& tag) {
  if (auto id = tag_id(tag)) return *id;
  if (sealed_) throw DataError("tag '" + tag + "' is not in the declared tag universe of lexicon " + name_);
  tags_.push_back(tag);
  return static_cast<TagId>(tags_.size() - 1);
}

void Lexicon::declare_tags(std::span<const std::string> tags) {
  for (const auto& t : tags) intern(t);
  sealed_ = true;
}

void Lexicon::add(std::string_view term, std::span<const std::string> tags) {
  auto key = text::lower(text::trim(term));
  auto& ids = entries_[key];
  for (const auto& t : tags) {
    const auto id = intern(t);
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
  }
  std::sort(ids.begin(), ids.end());
}

namespace {

std::vector<std::string> parse_tag_list(std::string_view list, std::size_t line_no) {
  std::vector<std::string> tags;
  for (auto& raw : text::split(list, ',')) {
    auto tag = std::string(text::trim(raw));
    if (tag.empty()) throw DataError("empty tag at line " + std::to_string(line_no));
    tags.push_back(std::move(tag));
  }
  return tags;
}

} // namespace

Lexicon load_lexicon(std::istream& in, std::string name, std::string language) {
  Lexicon lex(std::move(name), std::move(language));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    if (line.rfind("#!", 0) == 0) {
      auto directive = text::trim(std::string_view(line).substr(2));
      constexpr std::string_view kTags = "tags:";
      if (directive.rfind(kTags, 0) == 0) {
        const auto list = text::trim(directive.substr(kTags.size()));
        if (list.empty()) throw DataError("empty tag declaration at line " + std::to_string(line_no));
        lex.declare_tags(parse_tag_list(list, line_no));
      }
      continue;
    }
    if (line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError("missing tab separator at line " + std::to_string(line_no));
    const auto term = text::trim(std::string_view(line).substr(0, tab));
    if (term.empty()) throw DataError("empty term at line " + std::to_string(line_no));
    const auto tag_list = text::trim(std::string_view(line).substr(tab + 1));
    if (tag_list.empty()) throw DataError("empty tag list at line " + std::to_string(line_no));
    const auto tags = parse_tag_list(tag_list, line_no);
    try {
      lex.add(term, tags);
    } catch (const DataError& e) {
      throw DataError(std::string(e.what()) + " at line " + std::to_string(line_no));
    }
  }
  return lex;
}

Lexicon load_lexicon_file(const std::filesystem::path& path, std::string language) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open lexicon '" + path.string() + "'");
  try {
    return load_lexicon(in, path.stem().string(), std::move(language));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

TagCounts match_tokens(std::span<const std::string> tokens, const Lexicon& lexicon) {
  std::vector<std::size_t> counts(lexicon.tag_universe().size(), 0);
  for (const auto& tok : tokens)
    for (auto id : lexicon.lookup(tok)) ++counts[id];
  TagCounts out;
  for (std::size_t i = 0; i < counts.size(); ++i) out[lexicon.tag_universe()[i]] = counts[i];
  return out;
}

namespace {
constexpr std::string_view kRoleNames[] = {"emotion",    "modality",    "abstract_noun", "state_verb",
                                           "assertion_opinion", "toxicity", "pos_hint", "negation",
                                           "conjunction", "pronoun",    "clause_marker"};
}

std::string_view to_string(LexiconRole role) { return kRoleNames[static_cast<int>(role)]; }

std::optional<LexiconRole> parse_lexicon_role(std::string_view s) {
  for (std::size_t i = 0; i < kLexiconRoleCount; ++i)
    if (kRoleNames[i] == s) return static_cast<LexiconRole>(i);
  return std::nullopt;
}

std::string primary_language(std::string_view tag) {
  const auto dash = tag.find_first_of("-_");
  return text::lower(tag.substr(0, dash));
}

void LexiconSet::set(std::string language, LexiconRole role, Lexicon lexicon) {
  by_role_.insert_or_assign(std::make_pair(std::move(language), role), std::move(lexicon));
}

const Lexicon* LexiconSet::find(std::string_view language, LexiconRole role) const {
  if (auto it = by_role_.find(std::make_pair(std::string(language), role)); it != by_role_.end()) return &it->second;
  const auto primary = primary_language(language);
  if (auto it = by_role_.find(std::make_pair(primary, role)); it != by_role_.end()) return &it->second;
  return nullptr;
}

std::vector<LexiconRole> LexiconSet::missing_roles(std::string_view language) const {
  std::vector<LexiconRole> out;
  for (std::size_t i = 0; i < kLexiconRoleCount; ++i) {
    const auto role = static_cast<LexiconRole>(i);
    if (!find(language, role)) out.push_back(role);
  }
  return out;
}

std::vector<std::string> LexiconSet::languages() const {
  std::vector<std::string> out;
  for (const auto& [key, _] : by_role_)
    if (out.empty() || out.back() != key.first) out.push_back(key.first);
  return out;
}

LexiconSet LexiconSet::load_directory(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw DataError("lexicon directory '" + dir.string() + "' does not exist");
  LexiconSet set;
  std::vector<fs::path> langs;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_directory()) langs.push_back(entry.path());
  std::sort(langs.begin(), langs.end());
  for (const auto& lang_dir : langs) {
    const auto lang = lang_dir.filename().string();
    for (std::size_t i = 0; i < kLexiconRoleCount; ++i) {
      const auto role = static_cast<LexiconRole>(i);
      const auto file = lang_dir / (std::string(to_string(role)) + ".tsv");
      if (fs::exists(file)) set.set(lang, role, load_lexicon_file(file, lang));
    }
  }
  return set;
}

} // namespace stormscope

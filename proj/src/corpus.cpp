#include "stormscope/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "stormscope/error.hpp"
#include "stormscope/text.hpp"

namespace stormscope {

namespace {

constexpr std::string_view kPlatformNames[] = {"twitter_like", "telegram_like", "reddit_like"};
constexpr std::string_view kStanceNames[] = {"support_target", "oppose_target", "neutral",
                                             "support_both",   "oppose_both",   "off_topic"};
constexpr std::string_view kPhaseNames[] = {"begin", "middle", "end"};

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(std::string_view s, const std::string_view (&names)[N]) {
  for (std::size_t i = 0; i < N; ++i)
    if (names[i] == s) return static_cast<Enum>(i);
  return std::nullopt;
}

bool parse_digits(std::string_view s, int& out) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

} // namespace

std::string_view to_string(Platform p) { return kPlatformNames[static_cast<int>(p)]; }
std::string_view to_string(Stance s) { return kStanceNames[static_cast<int>(s)]; }
std::string_view to_string(Phase p) { return kPhaseNames[static_cast<int>(p)]; }
std::optional<Platform> parse_platform(std::string_view s) { return lookup<Platform>(s, kPlatformNames); }
std::optional<Stance> parse_stance(std::string_view s) { return lookup<Stance>(s, kStanceNames); }
std::optional<Phase> parse_phase(std::string_view s) { return lookup<Phase>(s, kPhaseNames); }

std::optional<UnixSeconds> parse_iso8601_utc(std::string_view s) {
  // YYYY-MM-DDThh:mm:ssZ
  if (s.size() != 20 || s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' || s[16] != ':' ||
      s[19] != 'Z')
    return std::nullopt;
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  if (!parse_digits(s.substr(0, 4), y) || !parse_digits(s.substr(5, 2), mo) || !parse_digits(s.substr(8, 2), d) ||
      !parse_digits(s.substr(11, 2), h) || !parse_digits(s.substr(14, 2), mi) || !parse_digits(s.substr(17, 2), sec))
    return std::nullopt;
  if (h > 23 || mi > 59 || sec > 59) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(mo)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  const auto days = std::chrono::sys_days{ymd}.time_since_epoch().count();
  return static_cast<UnixSeconds>(days) * 86400 + h * 3600 + mi * 60 + sec;
}

std::string format_iso8601_utc(UnixSeconds t) {
  const auto days = std::chrono::floor<std::chrono::days>(std::chrono::sys_seconds{std::chrono::seconds{t}});
  const std::chrono::year_month_day ymd{days};
  const auto secs = t - static_cast<UnixSeconds>(days.time_since_epoch().count()) * 86400;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long long>(secs / 3600), static_cast<long long>(secs / 60 % 60),
                static_cast<long long>(secs % 60));
  return buf;
}

bool Corpus::all_timestamped() const {
  return std::all_of(messages.begin(), messages.end(), [](const Message& m) { return m.timestamp.has_value(); });
}

bool Corpus::any_timestamped() const {
  return std::any_of(messages.begin(), messages.end(), [](const Message& m) { return m.timestamp.has_value(); });
}

void normalize(Corpus& corpus) {
  auto& msgs = corpus.messages;
  if (corpus.all_timestamped()) {
    std::stable_sort(msgs.begin(), msgs.end(),
                     [](const Message& a, const Message& b) { return *a.timestamp < *b.timestamp; });
    return;
  }
  for (const auto& m : msgs)
    if (!m.relative_order)
      throw DataError("no total order: message " + m.id +
                      " lacks relative_order while other messages lack timestamps");
  std::stable_sort(msgs.begin(), msgs.end(),
                   [](const Message& a, const Message& b) { return *a.relative_order < *b.relative_order; });
}

namespace {

[[noreturn]] void field_error(std::string_view what, std::string_view field, std::size_t line) {
  throw DataError(std::string(what) + " field " + std::string(field) + " at line " + std::to_string(line));
}

const nlohmann::json& require(const nlohmann::json& rec, std::string_view field, std::size_t line) {
  auto it = rec.find(field);
  if (it == rec.end()) field_error("missing", field, line);
  return *it;
}

std::string require_string(const nlohmann::json& rec, std::string_view field, std::size_t line) {
  const auto& v = require(rec, field, line);
  if (!v.is_string()) field_error("invalid", field, line);
  return v.get<std::string>();
}

std::optional<std::string> optional_string(const nlohmann::json& rec, std::string_view field, std::size_t line) {
  auto it = rec.find(field);
  if (it == rec.end()) return std::nullopt;
  if (!it->is_string()) field_error("invalid", field, line);
  return it->get<std::string>();
}

Message parse_record(const nlohmann::json& rec, std::size_t line) {
  if (!rec.is_object()) throw DataError("record is not an object at line " + std::to_string(line));
  Message m;
  m.id = require_string(rec, "id", line);
  if (m.id.empty()) field_error("empty", "id", line);
  const auto platform = parse_platform(require_string(rec, "platform", line));
  if (!platform) field_error("invalid", "platform", line);
  m.platform = *platform;
  m.thread_id = require_string(rec, "thread_id", line);
  m.parent_id = optional_string(rec, "parent_id", line);
  const auto& root = require(rec, "is_root", line);
  if (!root.is_boolean()) field_error("invalid", "is_root", line);
  m.is_root = root.get<bool>();
  m.author_id = optional_string(rec, "author_id", line);
  if (auto ts = optional_string(rec, "timestamp", line)) {
    m.timestamp = parse_iso8601_utc(*ts);
    if (!m.timestamp) field_error("invalid", "timestamp", line);
  }
  if (auto it = rec.find("relative_order"); it != rec.end()) {
    if (!it->is_number_unsigned()) field_error("invalid", "relative_order", line);
    m.relative_order = it->get<std::uint64_t>();
  }
  m.lang = require_string(rec, "lang", line);
  m.text = require_string(rec, "text", line);
  if (text::trim(m.text).empty()) field_error("empty", "text", line);
  const auto coarse = optional_string(rec, "stance_coarse", line);
  const auto sub = optional_string(rec, "stance_sub", line);
  if (coarse) {
    const auto s = parse_stance(*coarse);
    if (!s) field_error("invalid", "stance_coarse", line);
    m.stance = StanceLabel{*s, sub};
  } else if (sub) {
    field_error("orphan", "stance_sub", line);
  }
  if (auto phase = optional_string(rec, "phase_gold", line)) {
    m.phase_gold = parse_phase(*phase);
    if (!m.phase_gold) field_error("invalid", "phase_gold", line);
  }
  if (!m.timestamp && !m.relative_order)
    throw DataError("message " + m.id + " has neither timestamp nor relative_order at line " + std::to_string(line));
  return m;
}

} // namespace

ParseResult parse_corpus(std::istream& in) {
  ParseResult result;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError("malformed record at line " + std::to_string(line_no) + ": " + e.what());
    }
    Message m = parse_record(rec, line_no);
    if (!seen.insert(m.id).second) {
      ++result.duplicate_count;
      continue;
    }
    result.corpus.messages.push_back(std::move(m));
  }
  normalize(result.corpus);
  return result;
}

ParseResult parse_corpus_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus file '" + path + "'");
  return parse_corpus(in);
}

nlohmann::ordered_json to_json(const Message& m) {
  nlohmann::ordered_json j;
  j["id"] = m.id;
  j["platform"] = to_string(m.platform);
  j["thread_id"] = m.thread_id;
  if (m.parent_id) j["parent_id"] = *m.parent_id;
  j["is_root"] = m.is_root;
  if (m.author_id) j["author_id"] = *m.author_id;
  if (m.timestamp) j["timestamp"] = format_iso8601_utc(*m.timestamp);
  if (m.relative_order) j["relative_order"] = *m.relative_order;
  j["lang"] = m.lang;
  j["text"] = m.text;
  if (m.stance) {
    j["stance_coarse"] = to_string(m.stance->coarse);
    if (m.stance->sub) j["stance_sub"] = *m.stance->sub;
  }
  if (m.phase_gold) j["phase_gold"] = to_string(*m.phase_gold);
  return j;
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& m : corpus.messages) out << to_json(m).dump() << '\n';
}

void write_corpus_file(const std::string& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write corpus file '" + path + "'");
  write_corpus(out, corpus);
}

std::optional<ExportKind> parse_export_kind(std::string_view s) {
  if (s == "twitter_v2_json") return ExportKind::twitter_v2_json;
  if (s == "telegram_export_json") return ExportKind::telegram_export_json;
  if (s == "reddit_dump_json") return ExportKind::reddit_dump_json;
  return std::nullopt;
}

namespace {

std::string id_string(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  throw DataError("export record has a non-scalar id");
}

nlohmann::json without(const nlohmann::json& obj, std::initializer_list<std::string_view> keys) {
  nlohmann::json rest = nlohmann::json::object();
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (std::find(keys.begin(), keys.end(), it.key()) == keys.end()) rest[it.key()] = it.value();
  return rest;
}

// Accepts "YYYY-MM-DDThh:mm:ss" with optional fractional seconds and optional 'Z'.
std::optional<UnixSeconds> parse_lenient_timestamp(std::string_view s) {
  if (s.size() < 19) return std::nullopt;
  std::string core(s.substr(0, 19));
  core += 'Z';
  auto rest = s.substr(19);
  if (!rest.empty() && rest.front() == '.') {
    std::size_t i = 1;
    while (i < rest.size() && rest[i] >= '0' && rest[i] <= '9') ++i;
    rest = rest.substr(i);
  }
  if (!(rest.empty() || rest == "Z" || rest == "+00:00")) return std::nullopt;
  return parse_iso8601_utc(core);
}

AdaptResult adapt_twitter(const nlohmann::json& doc, std::string_view lang) {
  auto it = doc.find("data");
  if (it == doc.end() || !it->is_array()) throw DataError("twitter_v2_json: missing 'data' array");
  AdaptResult out;
  std::uint64_t order = 0;
  for (const auto& t : *it) {
    if (!t.is_object() || !t.contains("id") || !t.contains("text") || !t["text"].is_string())
      throw DataError("twitter_v2_json: tweet without id/text at index " + std::to_string(order));
    Message m;
    m.platform = Platform::twitter_like;
    m.id = id_string(t["id"]);
    m.text = t["text"].get<std::string>();
    m.thread_id = t.contains("conversation_id") ? id_string(t["conversation_id"]) : m.id;
    nlohmann::json other_refs = nlohmann::json::array();
    if (auto refs = t.find("referenced_tweets"); refs != t.end() && refs->is_array()) {
      for (const auto& r : *refs) {
        if (r.value("type", "") == "replied_to" && r.contains("id"))
          m.parent_id = id_string(r["id"]);
        else
          other_refs.push_back(r);
      }
    }
    m.is_root = !m.parent_id && m.thread_id == m.id;
    if (auto a = t.find("author_id"); a != t.end()) m.author_id = id_string(*a);
    if (auto c = t.find("created_at"); c != t.end() && c->is_string()) {
      m.timestamp = parse_lenient_timestamp(c->get<std::string>());
      if (!m.timestamp) throw DataError("twitter_v2_json: bad created_at on tweet " + m.id);
    }
    m.relative_order = order++;
    m.lang = t.contains("lang") && t["lang"].is_string() ? t["lang"].get<std::string>() : std::string(lang);
    auto side = without(t, {"id", "text", "conversation_id", "referenced_tweets", "author_id", "created_at", "lang"});
    if (!other_refs.empty()) side["referenced_tweets"] = other_refs;
    if (text::trim(m.text).empty()) {
      ++out.skipped;
      continue;
    }
    out.messages.push_back(std::move(m));
    out.side_channel.push_back(std::move(side));
  }
  return out;
}

std::string flatten_telegram_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  std::string s;
  if (v.is_array()) {
    for (const auto& part : v) {
      if (part.is_string())
        s += part.get<std::string>();
      else if (part.is_object() && part.contains("text") && part["text"].is_string())
        s += part["text"].get<std::string>();
    }
  }
  return s;
}

AdaptResult adapt_telegram(const nlohmann::json& doc, std::string_view lang) {
  auto it = doc.find("messages");
  if (it == doc.end() || !it->is_array()) throw DataError("telegram_export_json: missing 'messages' array");
  const std::string thread = doc.contains("id") ? id_string(doc["id"]) : doc.value("name", std::string("telegram"));
  AdaptResult out;
  std::uint64_t order = 0;
  for (const auto& t : *it) {
    if (!t.is_object() || !t.contains("id"))
      throw DataError("telegram_export_json: message without id at index " + std::to_string(order));
    if (t.value("type", "message") != "message") {
      ++out.skipped;
      continue;
    }
    Message m;
    m.platform = Platform::telegram_like;
    m.id = id_string(t["id"]);
    m.thread_id = thread;
    m.text = t.contains("text") ? flatten_telegram_text(t["text"]) : std::string{};
    if (auto r = t.find("reply_to_message_id"); r != t.end()) m.parent_id = id_string(*r);
    m.is_root = !m.parent_id;
    if (auto a = t.find("from_id"); a != t.end() && !a->is_null()) m.author_id = id_string(*a);
    if (auto u = t.find("date_unixtime"); u != t.end()) {
      const std::string raw = u->is_string() ? u->get<std::string>() : id_string(*u);
      std::int64_t secs = 0;
      auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), secs);
      if (ec != std::errc{} || ptr != raw.data() + raw.size())
        throw DataError("telegram_export_json: bad date_unixtime on message " + m.id);
      m.timestamp = secs;
    } else if (auto d = t.find("date"); d != t.end() && d->is_string()) {
      m.timestamp = parse_lenient_timestamp(d->get<std::string>());
      if (!m.timestamp) throw DataError("telegram_export_json: bad date on message " + m.id);
    }
    m.relative_order = order++;
    m.lang = std::string(lang);
    auto side = without(t, {"id", "type", "text", "reply_to_message_id", "from_id", "date_unixtime", "date"});
    if (text::trim(m.text).empty()) {
      ++out.skipped;
      continue;
    }
    out.messages.push_back(std::move(m));
    out.side_channel.push_back(std::move(side));
  }
  return out;
}

AdaptResult adapt_reddit(const nlohmann::json& doc, std::string_view lang) {
  auto sub = doc.find("submission");
  auto comments = doc.find("comments");
  if (sub == doc.end() || !sub->is_object() || !sub->contains("id"))
    throw DataError("reddit_dump_json: missing 'submission' object with id");
  if (comments == doc.end() || !comments->is_array()) throw DataError("reddit_dump_json: missing 'comments' array");
  AdaptResult out;
  std::uint64_t order = 0;
  const std::string root_id = id_string((*sub)["id"]);

  auto author_of = [](const nlohmann::json& rec) -> std::optional<std::string> {
    auto a = rec.find("author");
    if (a == rec.end() || !a->is_string()) return std::nullopt;
    return a->get<std::string>();
  };

  Message root;
  root.platform = Platform::reddit_like;
  root.id = root_id;
  root.thread_id = root_id;
  root.is_root = true;
  root.text = sub->value("title", std::string{});
  const auto body = sub->value("selftext", std::string{});
  if (!text::trim(body).empty()) root.text += (root.text.empty() ? "" : "\n\n") + body;
  root.author_id = author_of(*sub);
  root.relative_order = order++;
  root.lang = std::string(lang);
  if (text::trim(root.text).empty()) {
    ++out.skipped;
  } else {
    out.side_channel.push_back(without(*sub, {"id", "title", "selftext", "author"}));
    out.messages.push_back(std::move(root));
  }

  for (const auto& c : *comments) {
    if (!c.is_object() || !c.contains("id"))
      throw DataError("reddit_dump_json: comment without id at index " + std::to_string(order));
    Message m;
    m.platform = Platform::reddit_like;
    m.id = id_string(c["id"]);
    m.thread_id = root_id;
    m.text = c.value("body", std::string{});
    if (auto p = c.find("parent_id"); p != c.end() && p->is_string()) {
      auto parent = p->get<std::string>();
      if (parent.size() > 3 && parent[0] == 't' && parent[2] == '_') parent = parent.substr(3);
      m.parent_id = parent;
    }
    m.author_id = author_of(c);
    m.relative_order = order++;
    m.lang = std::string(lang);
    if (text::trim(m.text).empty()) {
      ++out.skipped;
      continue;
    }
    out.side_channel.push_back(without(c, {"id", "body", "parent_id", "author"}));
    out.messages.push_back(std::move(m));
  }
  return out;
}

} // namespace

AdaptResult adapt_export(std::string_view raw, ExportKind kind, std::string_view lang) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("export document is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw DataError("export document must be a JSON object");
  switch (kind) {
  case ExportKind::twitter_v2_json: return adapt_twitter(doc, lang);
  case ExportKind::telegram_export_json: return adapt_telegram(doc, lang);
  case ExportKind::reddit_dump_json: return adapt_reddit(doc, lang);
  }
  throw ArgumentError("unknown export kind");
}

ReplyStructure reply_structure(const Corpus& corpus) {
  std::unordered_map<std::string_view, const Message*> by_id;
  by_id.reserve(corpus.size());
  for (const auto& m : corpus.messages) by_id.emplace(m.id, &m);

  ReplyStructure rs;
  std::vector<std::string> dangling;
  for (const auto& m : corpus.messages) {
    if (m.is_root) {
      ++rs.n_roots;
      continue;
    }
    if (!m.parent_id) {
      ++rs.n_replies_to_root;
      continue;
    }
    auto it = by_id.find(*m.parent_id);
    if (it == by_id.end() || it->second->thread_id != m.thread_id) {
      dangling.push_back(m.id);
      continue;
    }
    if (it->second->is_root)
      ++rs.n_replies_to_root;
    else
      ++rs.n_replies_to_replies;
  }
  if (!dangling.empty()) {
    std::string list;
    for (const auto& id : dangling) list += (list.empty() ? "" : ", ") + id;
    throw DataError("dangling parent_id on messages: " + list);
  }
  const auto denom = rs.n_replies_to_root + rs.n_replies_to_replies;
  rs.fraction_to_root = denom == 0 ? 0.0 : static_cast<double>(rs.n_replies_to_root) / static_cast<double>(denom);
  return rs;
}

} // namespace stormscope

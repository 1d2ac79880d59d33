#include "stormscope/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "stormscope/error.hpp"
#include "stormscope/rng.hpp"
#include "stormscope/text.hpp"

namespace stormscope {

namespace {

// Word pools. Every word is tagged in the shipped English demo lexicons (or, for
// fillers, in none of them and free of heuristic suffixes), so planted skews
// show up in the extracted features.
struct Category {
  Feature feature;
  std::vector<std::string_view> phrases;
};

const std::vector<Category>& categories() {
  static const std::vector<Category> c = {
      {Feature::n_adverbs, {"quickly", "really", "often", "still", "soon", "already"}},
      {Feature::n_adjectives, {"new", "old", "big", "free", "real", "careful"}},
      {Feature::n_verbs, {"say", "go", "fix", "buy", "sell", "pay", "talk", "stop"}},
      {Feature::n_proper_nouns, {"Musk", "Tesla", "Starlink", "Kyiv", "Crimea", "Putin"}},
      {Feature::n_conjunctions, {"and", "or", "yet"}},
      {Feature::n_negations, {"not", "nobody", "nothing", "none"}},
      {Feature::n_comparatives, {"better", "worse", "bigger", "smaller", "richer"}},
      {Feature::n_superlatives, {"best", "worst", "biggest", "richest", "least"}},
      {Feature::n_personal_pronouns, {"I", "you", "he", "she", "we", "they", "them", "us"}},
      {Feature::n_passive_forms, {"was banned", "were paid", "is made", "was sold", "got taken"}},
      {Feature::n_contrastive_but, {"but"}},
      {Feature::n_concessive_clauses, {"although the", "though the"}},
      {Feature::n_causal_clauses, {"because the", "since the"}},
      {Feature::n_consecutive_clauses, {"therefore the", "thus the"}},
      {Feature::n_relative_clauses, {"people who", "company which", "man who"}},
      {Feature::n_temporal_clauses, {"before the", "after the", "until the"}},
      {Feature::n_conditional_clauses, {"if the", "unless the"}},
      {Feature::n_quote_marks, {"\"deal\"", "\"plan\"", "\"peace\""}},
      {Feature::n_question_marks, {}}, // ends the sentence with '?'
      {Feature::n_abstract_nouns, {"freedom", "truth", "justice", "democracy", "liberty", "censorship"}},
      {Feature::n_modal_verbs, {"can", "could", "should", "would", "may", "might"}},
      {Feature::n_state_verbs, {"know", "seem", "own", "need", "understand", "belong"}},
      {Feature::n_high_modality, {"definitely", "certainly", "absolutely", "clearly"}},
      {Feature::n_assertion_opinion, {"claim", "opinion", "fact", "facts", "argue"}},
      {Feature::fear, {"afraid", "panic", "threat", "danger"}},
      {Feature::surprise, {"surprise", "wow", "unbelievable"}},
      {Feature::anger, {"angry", "outrage", "rage"}},
      {Feature::hope, {"hope", "wish", "future"}},
      {Feature::disgust, {"disgust", "gross"}},
      {Feature::happiness, {"glad", "joy", "fun"}},
      {Feature::sadness, {"sorry", "grief", "cry"}},
      {Feature::trust, {"trust", "loyal", "respect"}},
      {Feature::negative, {"awful", "nonsense", "disaster"}},
      {Feature::positive, {"nice", "brilliant", "bravo"}},
  };
  return c;
}

constexpr std::string_view kFillers[] = {"the",  "a",     "of",    "to",   "in",    "on",    "this", "about",
                                         "with", "for",   "at",    "deal", "plan",  "car",   "rocket", "poll",
                                         "vote", "day",   "year",  "week", "world", "game",  "team", "stream",
                                         "chat", "map",   "gas",   "oil",  "grain", "city",  "side", "point",
                                         "link", "video", "party", "fans", "thing", "satellite"};
constexpr std::string_view kToxic[] = {"idiot", "clown", "moron", "loser", "trash", "scum"};
constexpr std::pair<std::string_view, double> kEmojis[] = {
    {"\xF0\x9F\xA4\xA1", 5.0}, // clown face
    {"\xF0\x9F\x92\x80", 2.0}, // skull
    {"\xF0\x9F\x98\x82", 2.0}, // tears of joy
    {"\xF0\x9F\x94\xA5", 1.0}, // fire
};
constexpr double kFillerWeight = 30.0;

std::string_view group_name(Stance s) {
  switch (s) {
    case Stance::support_target:
    case Stance::support_both: return "support";
    case Stance::oppose_target:
    case Stance::oppose_both: return "oppose";
    default: return "neutral";
  }
}

template <typename T>
std::size_t pick_weighted(Rng& rng, const std::vector<T>& weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  return weights.size() - 1;
}

template <typename T, std::size_t N>
const T& pick(Rng& rng, const T (&items)[N]) {
  return items[rng.below(N)];
}

std::size_t noisy_count(Rng& rng, double mu, double cv) {
  if (mu <= 0.0) return 0;
  const double x = std::max(0.0, mu * (1.0 + cv * rng.normal()));
  const double whole = std::floor(x);
  return static_cast<std::size_t>(whole) + (rng.bernoulli(x - whole) ? 1 : 0);
}

/// k distinct indices from [lo, hi), in ascending order.
std::vector<std::size_t> sample_distinct(Rng& rng, std::size_t lo, std::size_t hi, std::size_t k) {
  std::vector<std::size_t> pool(hi - lo);
  std::iota(pool.begin(), pool.end(), lo);
  k = std::min(k, pool.size());
  for (std::size_t i = 0; i < k; ++i) std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

struct Draft {
  int day = 0;
  int second = 0;
  Stance stance = Stance::neutral;
  std::optional<std::string> sub;
  std::optional<Phase> phase;
  std::vector<std::vector<std::string>> sentences;
  std::vector<bool> question;
  std::string tail; // hashtags and emojis appended after the sentences
};

void insert_word(Rng& rng, Draft& d, std::string word) {
  auto& s = d.sentences[rng.below(d.sentences.size())];
  // Keep the closing filler last so clause markers always have a successor.
  const auto pos = s.size() > 1 ? rng.below(s.size() - 1) : 0;
  s.insert(s.begin() + static_cast<std::ptrdiff_t>(pos), std::move(word));
}

std::string render(const Draft& d) {
  std::string out;
  for (std::size_t i = 0; i < d.sentences.size(); ++i) {
    if (i) out += ' ';
    std::string sentence;
    for (const auto& w : d.sentences[i]) {
      if (!sentence.empty()) sentence += ' ';
      sentence += w;
    }
    const auto first = sentence.find_first_not_of('"');
    if (first != std::string::npos && sentence[first] >= 'a' && sentence[first] <= 'z') sentence[first] -= 32;
    out += sentence;
    out += d.question[i] ? '?' : '.';
  }
  return out + d.tail;
}

class TextSampler {
public:
  explicit TextSampler(const SynthConfig& c) : config_(c) {}

  void fill(Rng& rng, Draft& d) const {
    const auto weights = weights_for(d);
    const auto n_tokens = static_cast<std::size_t>(config_.min_tokens) +
                          rng.below(static_cast<std::uint64_t>(config_.max_tokens - config_.min_tokens + 1));
    std::size_t used = 0;
    while (used < n_tokens) {
      std::vector<std::string> sentence;
      bool question = false;
      const auto target = 4 + rng.below(5);
      while (sentence.size() < target && used + sentence.size() + 1 < n_tokens + 1) {
        const auto i = pick_weighted(rng, weights);
        if (i == weights.size() - 1) {
          sentence.emplace_back(pick(rng, kFillers));
          continue;
        }
        const auto& cat = categories()[i];
        if (cat.feature == Feature::n_question_marks) {
          question = true;
          continue;
        }
        const auto phrase = cat.phrases[rng.below(cat.phrases.size())];
        for (const auto& w : text::split(phrase, ' ')) sentence.push_back(w);
      }
      sentence.emplace_back(pick(rng, kFillers));
      used += sentence.size();
      d.sentences.push_back(std::move(sentence));
      d.question.push_back(question);
    }
  }

private:
  std::vector<double> weights_for(const Draft& d) const {
    std::vector<double> w(categories().size() + 1, 1.0);
    w.back() = kFillerWeight;
    auto apply = [&](std::string_view key) {
      auto it = config_.feature_skews.find(std::string(key));
      if (it == config_.feature_skews.end()) return;
      for (std::size_t i = 0; i < categories().size(); ++i)
        if (auto f = it->second.find(categories()[i].feature); f != it->second.end()) w[i] *= f->second;
    };
    apply(to_string(d.stance));
    apply(group_name(d.stance));
    if (d.phase) apply(to_string(*d.phase));
    return w;
  }

  const SynthConfig& config_;
};

double wave_mass(const SynthConfig& c, const PlatformSpec& p, int start, int day) {
  double mu = 0.0;
  for (const auto& w : c.waves)
    if (w.day <= day && w.day >= start) mu += p.wave_scale * w.amplitude * std::exp2(-(day - w.day) / c.decay_halflife_days);
  return mu;
}

double supporter_both_share(const SynthConfig& c, const PlatformSpec& p, int day) {
  if (day >= c.appeasement_day && c.late_support_both_share > 0.0) return c.late_support_both_share;
  const double st = p.stance_mix.at(Stance::support_target), sb = p.stance_mix.at(Stance::support_both);
  return st + sb > 0.0 ? sb / (st + sb) : 0.0;
}

double second_share(const PlatformSpec& p, Stance first, Stance second) {
  const double a = p.stance_mix.at(first), b = p.stance_mix.at(second);
  return a + b > 0.0 ? b / (a + b) : 0.0;
}

void generate_platform(const SynthConfig& c, std::size_t index, Rng& rng, Corpus& corpus, PlatformTruth& truth) {
  const auto& p = c.platforms[index];
  const int start = index == 0 ? 0 : c.spillover_day;
  const auto n_bins = static_cast<std::size_t>(c.n_days - start);
  truth.name = p.name;
  truth.kind = p.kind;
  truth.start_day = start;

  for (const auto& w : c.waves)
    if (w.day >= start && w.amplitude * p.wave_scale > 0.0) {
      truth.peak_days.push_back(w.day);
      truth.peak_bins.push_back(static_cast<std::size_t>(w.day - start));
    }
  std::sort(truth.peak_days.begin(), truth.peak_days.end());
  std::sort(truth.peak_bins.begin(), truth.peak_bins.end());
  if (!truth.peak_bins.empty()) {
    const auto seg = segment_phases(n_bins, truth.peak_bins);
    truth.phase3 = seg.phase3;
    truth.span4 = seg.span4;
  }

  // Daily volumes per stream.
  std::vector<Draft> drafts;
  for (int day = start; day < c.n_days; ++day) {
    const double supporters = p.supporter_daily_rate;
    const double neutral = p.neutral_daily_rate;
    double opponents = p.opponent_baseline_rate * (index == 0 && day >= c.spillover_day ? p.spillover_influx : 1.0);
    opponents += wave_mass(c, p, start, day);
    if (c.fade_halflife_days > 0.0 && day > c.consequence_day)
      opponents *= std::exp2(-(day - c.consequence_day) / c.fade_halflife_days);

    const std::size_t ns = noisy_count(rng, supporters, c.count_noise_cv);
    const std::size_t no = noisy_count(rng, opponents, c.count_noise_cv);
    const std::size_t nn = noisy_count(rng, neutral, c.count_noise_cv);
    truth.daily_supporters.push_back(ns);
    truth.daily_opponents.push_back(no);
    truth.daily_neutral.push_back(nn);

    auto emit = [&](Stance a, Stance b, double share_b, std::size_t count) {
      for (std::size_t k = 0; k < count; ++k) {
        Draft d;
        d.day = day;
        d.second = 1 + static_cast<int>(rng.below(86399));
        d.stance = rng.bernoulli(share_b) ? b : a;
        if (auto it = c.subs.find(d.stance); it != c.subs.end() && !it->second.empty())
          d.sub = it->second[rng.below(it->second.size())];
        if (!truth.phase3.empty()) d.phase = truth.phase3[static_cast<std::size_t>(day - start)];
        drafts.push_back(std::move(d));
      }
    };
    emit(Stance::support_target, Stance::support_both, supporter_both_share(c, p, day), ns);
    emit(Stance::oppose_target, Stance::oppose_both, second_share(p, Stance::oppose_target, Stance::oppose_both), no);
    emit(Stance::neutral, Stance::off_topic, second_share(p, Stance::neutral, Stance::off_topic), nn);
  }
  std::stable_sort(drafts.begin(), drafts.end(), [](const Draft& a, const Draft& b) {
    return std::pair(a.day, a.second) < std::pair(b.day, b.second);
  });

  const TextSampler sampler(c);
  for (auto& d : drafts) sampler.fill(rng, d);
  const std::size_t n = drafts.size();
  truth.n_messages = n;
  if (n == 0) return;

  // Exact plantings.
  const auto n_toxic = static_cast<std::size_t>(std::llround(p.toxicity_rate * static_cast<double>(n)));
  for (auto i : sample_distinct(rng, 0, n, n_toxic)) insert_word(rng, drafts[i], std::string(pick(rng, kToxic)));
  truth.toxic_messages = n_toxic;

  if (!c.keywords.empty() && p.keyword_rate > 0.0) {
    const double total = p.keyword_rate * static_cast<double>(n);
    double weight_sum = 0.0;
    for (const auto& [_, w] : c.keywords) weight_sum += w;
    // Largest-remainder allocation keeps the planted order of keyword weights.
    std::vector<std::size_t> alloc(c.keywords.size());
    std::vector<std::pair<double, std::size_t>> rem;
    std::size_t assigned = 0;
    for (std::size_t k = 0; k < c.keywords.size(); ++k) {
      const double exact = total * c.keywords[k].second / weight_sum;
      alloc[k] = static_cast<std::size_t>(std::floor(exact));
      assigned += alloc[k];
      rem.emplace_back(exact - std::floor(exact), k);
    }
    std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; assigned < static_cast<std::size_t>(std::llround(total)) && r < rem.size(); ++r, ++assigned)
      ++alloc[rem[r].second];
    for (std::size_t k = 0; k < c.keywords.size(); ++k) {
      for (std::size_t j = 0; j < alloc[k]; ++j) insert_word(rng, drafts[rng.below(n)], c.keywords[k].first);
      truth.keywords[c.keywords[k].first] = alloc[k];
    }
  }

  for (const auto& [tag, count] : p.hashtags) {
    for (std::size_t j = 0; j < count; ++j) drafts[rng.below(n)].tail += " #" + tag;
    truth.hashtags["#" + text::lower(tag)] += count;
  }
  {
    std::vector<double> w;
    for (const auto& e : kEmojis) w.push_back(e.second);
    for (std::size_t j = 0; j < p.emoji_total; ++j)
      drafts[rng.below(n)].tail += " " + std::string(kEmojis[pick_weighted(rng, w)].first);
    truth.emoji_total = p.emoji_total;
  }

  // Authors realizing the repeat fractions: A1 single, A2 double, A3 triple posters.
  std::vector<std::string> authors(n);
  const bool has_authors = p.kind != Platform::reddit_like;
  if (has_authors) {
    const double a = static_cast<double>(n) / (1.0 + p.frac_gt1 + p.frac_gt2);
    auto a3 = static_cast<std::size_t>(std::llround(p.frac_gt2 * a));
    auto a2 = static_cast<std::size_t>(std::llround(p.frac_gt1 * a)) - std::min(a3, static_cast<std::size_t>(std::llround(p.frac_gt1 * a)));
    while (2 * a2 + 3 * a3 > n) a2 > 0 ? --a2 : --a3;
    const std::size_t a1 = n - 2 * a2 - 3 * a3;
    std::vector<std::size_t> slots;
    std::size_t author = 0;
    for (std::size_t i = 0; i < a3; ++i, ++author) slots.insert(slots.end(), 3, author);
    for (std::size_t i = 0; i < a2; ++i, ++author) slots.insert(slots.end(), 2, author);
    for (std::size_t i = 0; i < a1; ++i, ++author) slots.push_back(author);
    rng.shuffle(std::span<std::size_t>(slots));
    char buf[32];
    for (std::size_t i = 0; i < n; ++i) {
      std::snprintf(buf, sizeof buf, "%s-u%05zu", p.name.c_str(), slots[i]);
      authors[i] = buf;
    }
    truth.n_authors = author;
    truth.frac_gt1 = author ? static_cast<double>(a2 + a3) / static_cast<double>(author) : 0.0;
    truth.frac_gt2 = author ? static_cast<double>(a3) / static_cast<double>(author) : 0.0;
  }

  // Thread: the first message is the root; a planted share of replies targets it.
  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%s-%06zu", p.name.c_str(), i);
    ids[i] = buf;
  }
  std::vector<bool> to_root(n, false);
  if (n > 1) {
    auto k = static_cast<std::size_t>(std::llround(p.reply_to_root_fraction * static_cast<double>(n - 1)));
    k = std::max<std::size_t>(k, 1);
    to_root[1] = true;
    for (auto i : sample_distinct(rng, 2, n, k - 1)) to_root[i] = true;
    truth.replies_to_root = k;
    truth.replies_to_replies = n - 1 - k;
  }

  const std::string thread = p.name + "-thread";
  for (std::size_t i = 0; i < n; ++i) {
    const auto& d = drafts[i];
    Message m;
    m.id = ids[i];
    m.platform = p.kind;
    m.thread_id = thread;
    m.is_root = i == 0;
    if (i > 0) m.parent_id = to_root[i] ? ids[0] : ids[1 + rng.below(i - 1 > 0 ? i - 1 : 1)];
    if (has_authors) {
      m.author_id = authors[i];
      m.timestamp = c.origin + static_cast<UnixSeconds>(d.day) * 86400 + d.second;
    } else {
      m.relative_order = i;
    }
    m.lang = c.lang;
    m.text = render(d);
    m.stance = StanceLabel{d.stance, d.sub};
    m.phase_gold = d.phase;
    ++truth.stance_counts[std::string(to_string(d.stance))];
    if (d.phase) ++truth.phase_counts[std::string(to_string(*d.phase))];
    corpus.messages.push_back(std::move(m));
  }
  corpus.meta["storm"] = c.storm;
  corpus.meta["platform"] = p.name;
  corpus.meta["generator_seed"] = std::to_string(c.seed);
}

// ---- config parsing ----

double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || !std::isfinite(d)) throw DataError("config: " + key + " expects a number, got '" + v + "'");
  return d;
}

long long to_int(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != std::floor(d)) throw DataError("config: " + key + " expects an integer, got '" + v + "'");
  return static_cast<long long>(d);
}

std::vector<std::pair<std::string, std::string>> pairs(const std::string& key, const std::string& v) {
  std::vector<std::pair<std::string, std::string>> out;
  if (text::trim(v).empty()) return out;
  for (const auto& item : text::split(v, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw DataError("config: " + key + " expects name:value items");
    out.emplace_back(std::string(text::trim(item.substr(0, colon))), std::string(text::trim(item.substr(colon + 1))));
  }
  return out;
}

bool set_platform_option(PlatformSpec& p, const std::string& key, const std::string& full_key, const std::string& v) {
  if (key == "name") {
    if (v.empty()) throw DataError("config: " + full_key + " must not be empty");
    p.name = v;
  } else if (key == "kind") {
    auto k = parse_platform(v);
    if (!k) throw DataError("config: unknown platform kind '" + v + "'");
    p.kind = *k;
  } else if (key == "supporter_daily_rate") {
    p.supporter_daily_rate = to_double(full_key, v);
  } else if (key == "neutral_daily_rate") {
    p.neutral_daily_rate = to_double(full_key, v);
  } else if (key == "opponent_baseline_rate") {
    p.opponent_baseline_rate = to_double(full_key, v);
  } else if (key == "spillover_influx") {
    p.spillover_influx = to_double(full_key, v);
  } else if (key == "wave_scale") {
    p.wave_scale = to_double(full_key, v);
  } else if (key == "toxicity_rate") {
    p.toxicity_rate = to_double(full_key, v);
  } else if (key == "repeat_author_frac_gt1") {
    p.frac_gt1 = to_double(full_key, v);
  } else if (key == "repeat_author_frac_gt2") {
    p.frac_gt2 = to_double(full_key, v);
  } else if (key == "reply_to_root_fraction") {
    p.reply_to_root_fraction = to_double(full_key, v);
  } else if (key == "emoji_total") {
    const auto n = to_int(full_key, v);
    if (n < 0) throw DataError("config: " + full_key + " must be >= 0");
    p.emoji_total = static_cast<std::size_t>(n);
  } else if (key == "hashtags") {
    p.hashtags.clear();
    for (const auto& [tag, count] : pairs(full_key, v)) {
      const auto n = to_int(full_key, count);
      if (tag.empty() || n < 0) throw DataError("config: bad hashtag item in " + full_key);
      p.hashtags.emplace_back(tag, static_cast<std::size_t>(n));
    }
  } else if (key == "keyword_rate") {
    p.keyword_rate = to_double(full_key, v);
  } else if (key.starts_with("stance_mix.")) {
    auto s = parse_stance(key.substr(11));
    if (!s) throw DataError("config: unknown stance in " + full_key);
    p.stance_mix[*s] = to_double(full_key, v);
  } else {
    return false;
  }
  return true;
}

} // namespace

SynthConfig::SynthConfig() {
  platforms[0].name = "p1";
  platforms[0].kind = Platform::twitter_like;
  platforms[1].name = "p2";
  platforms[1].kind = Platform::telegram_like;
  for (auto& p : platforms) {
    p.stance_mix = {{Stance::support_target, 0.3}, {Stance::oppose_target, 0.4}, {Stance::neutral, 0.2},
                    {Stance::support_both, 0.0},   {Stance::oppose_both, 0.05},  {Stance::off_topic, 0.05}};
  }
}

void set_synth_option(SynthConfig& c, const std::string& key, const std::string& v) {
  if (key == "seed") {
    try {
      std::size_t pos = 0;
      c.seed = std::stoull(v, &pos);
      if (pos != v.size()) throw DataError("");
    } catch (const std::exception&) {
      throw DataError("config: seed expects an unsigned integer, got '" + v + "'");
    }
  } else if (key == "storm") {
    c.storm = v;
  } else if (key == "lang") {
    c.lang = v;
  } else if (key == "origin") {
    auto t = parse_iso8601_utc(v);
    if (!t || *t % 86400 != 0) throw DataError("config: origin must be a UTC midnight like 2022-10-03T00:00:00Z");
    c.origin = *t;
  } else if (key == "n_days") {
    c.n_days = static_cast<int>(to_int(key, v));
  } else if (key == "spillover_day") {
    c.spillover_day = static_cast<int>(to_int(key, v));
  } else if (key == "appeasement_day") {
    c.appeasement_day = static_cast<int>(to_int(key, v));
  } else if (key == "consequence_day") {
    c.consequence_day = static_cast<int>(to_int(key, v));
  } else if (key.starts_with("wave.")) {
    const int day = static_cast<int>(to_int(key, key.substr(5)));
    const double amp = to_double(key, v);
    std::erase_if(c.waves, [&](const Wave& w) { return w.day == day; });
    c.waves.push_back({day, amp});
    std::sort(c.waves.begin(), c.waves.end(), [](const Wave& a, const Wave& b) { return a.day < b.day; });
  } else if (key == "waves") {
    c.waves.clear();
    for (const auto& [day, amp] : pairs(key, v)) c.waves.push_back({static_cast<int>(to_int(key, day)), to_double(key, amp)});
    std::sort(c.waves.begin(), c.waves.end(), [](const Wave& a, const Wave& b) { return a.day < b.day; });
  } else if (key == "decay_halflife_days") {
    c.decay_halflife_days = to_double(key, v);
  } else if (key == "fade_halflife_days") {
    c.fade_halflife_days = to_double(key, v);
  } else if (key == "count_noise_cv") {
    c.count_noise_cv = to_double(key, v);
  } else if (key == "late_support_both_share") {
    c.late_support_both_share = to_double(key, v);
  } else if (key == "min_tokens") {
    c.min_tokens = static_cast<int>(to_int(key, v));
  } else if (key == "max_tokens") {
    c.max_tokens = static_cast<int>(to_int(key, v));
  } else if (key == "keywords") {
    c.keywords.clear();
    for (const auto& [word, weight] : pairs(key, v)) c.keywords.emplace_back(text::lower(word), to_double(key, weight));
  } else if (key.starts_with("subs.")) {
    auto s = parse_stance(key.substr(5));
    if (!s) throw DataError("config: unknown stance in " + key);
    c.subs[*s].clear();
    for (const auto& sub : text::split(v, ','))
      if (!text::trim(sub).empty()) c.subs[*s].emplace_back(text::trim(sub));
  } else if (key.starts_with("skew.")) {
    const auto rest = key.substr(5);
    const auto dot = rest.find('.');
    if (dot == std::string::npos) throw DataError("config: skew keys look like skew.<class>.<feature>");
    const auto cls = rest.substr(0, dot);
    const bool known = parse_stance(cls) || parse_phase(cls) || cls == "support" || cls == "oppose" || cls == "neutral";
    if (!known) throw DataError("config: unknown skew class '" + cls + "'");
    const auto f = parse_feature(rest.substr(dot + 1));
    if (!f || *f == Feature::avg_sentence_length) throw DataError("config: unknown skew feature in " + key);
    c.feature_skews[cls][*f] = to_double(key, v);
  } else if (key.starts_with("platform1.") || key.starts_with("platform2.")) {
    auto& p = c.platforms[key[8] == '1' ? 0 : 1];
    if (!set_platform_option(p, key.substr(10), key, v)) throw DataError("config: unknown key " + key);
  } else {
    bool ok = true;
    for (auto& p : c.platforms) ok = set_platform_option(p, key, key, v) && ok;
    if (!ok) throw DataError("config: unknown key " + key);
  }
}

void validate(const SynthConfig& c) {
  auto fail = [](const std::string& why) { throw DataError("invalid synth config: " + why); };
  if (c.n_days <= 0) fail("n_days must be positive");
  if (!(0 < c.spillover_day && c.spillover_day < c.appeasement_day && c.appeasement_day < c.consequence_day &&
        c.consequence_day < c.n_days))
    fail("event days must satisfy 0 < spillover_day < appeasement_day < consequence_day < n_days");
  for (const auto& w : c.waves) {
    if (w.day < 0 || w.day >= c.n_days) fail("wave day " + std::to_string(w.day) + " outside [0, n_days)");
    if (w.amplitude < 0.0) fail("wave amplitudes must be >= 0");
  }
  if (!(c.decay_halflife_days > 0.0)) fail("decay_halflife_days must be positive");
  if (c.fade_halflife_days < 0.0) fail("fade_halflife_days must be >= 0");
  if (c.count_noise_cv < 0.0) fail("count_noise_cv must be >= 0");
  if (c.late_support_both_share < 0.0 || c.late_support_both_share > 1.0) fail("late_support_both_share must lie in [0,1]");
  if (c.min_tokens < 1 || c.max_tokens < c.min_tokens) fail("need 1 <= min_tokens <= max_tokens");
  for (const auto& [_, w] : c.keywords)
    if (!(w > 0.0)) fail("keyword weights must be positive");
  for (const auto& [cls, skews] : c.feature_skews)
    for (const auto& [f, m] : skews)
      if (!(m > 0.0)) fail("skew multipliers must be positive (" + cls + "." + std::string(feature_name(f)) + ")");
  for (const auto& p : c.platforms) {
    if (!(p.supporter_daily_rate > 0.0)) fail(p.name + ": supporter_daily_rate must be positive");
    if (p.neutral_daily_rate < 0.0 || p.opponent_baseline_rate < 0.0 || p.spillover_influx < 0.0 || p.wave_scale < 0.0)
      fail(p.name + ": rates must be >= 0");
    if (p.toxicity_rate < 0.0 || p.toxicity_rate > 1.0) fail(p.name + ": toxicity_rate must lie in [0,1]");
    if (p.frac_gt2 < 0.0 || p.frac_gt2 > p.frac_gt1 || p.frac_gt1 > 1.0) fail(p.name + ": need 0 <= frac_gt2 <= frac_gt1 <= 1");
    if (p.reply_to_root_fraction < 0.0 || p.reply_to_root_fraction > 1.0) fail(p.name + ": reply_to_root_fraction must lie in [0,1]");
    if (p.keyword_rate < 0.0) fail(p.name + ": keyword_rate must be >= 0");
    double sum = 0.0;
    for (const auto& [_, v] : p.stance_mix) {
      if (v < 0.0) fail(p.name + ": stance_mix entries must be >= 0");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) fail(p.name + ": stance_mix must sum to 1");
  }
  if (c.platforms[0].name == c.platforms[1].name) fail("platform names must differ");
}

SynthConfig parse_synth_config(std::istream& in) {
  SynthConfig c;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw DataError("config: expected key = value at line " + std::to_string(line_no));
    try {
      set_synth_option(c, std::string(text::trim(t.substr(0, eq))), std::string(text::trim(t.substr(eq + 1))));
    } catch (const DataError& e) {
      throw DataError(std::string(e.what()) + " (line " + std::to_string(line_no) + ")");
    }
  }
  validate(c);
  return c;
}

SynthConfig load_synth_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config " + path);
  return parse_synth_config(in);
}

SynthOutput generate(const SynthConfig& config) {
  validate(config);
  SynthOutput out;
  out.truth.seed = config.seed;
  out.truth.storm = config.storm;
  out.truth.origin = config.origin;
  out.truth.n_days = config.n_days;
  out.truth.spillover_day = config.spillover_day;
  out.truth.appeasement_day = config.appeasement_day;
  out.truth.consequence_day = config.consequence_day;
  Rng rng(config.seed);
  for (std::size_t i = 0; i < config.platforms.size(); ++i) {
    Corpus corpus;
    PlatformTruth truth;
    generate_platform(config, i, rng, corpus, truth);
    normalize(corpus);
    out.corpora.push_back(std::move(corpus));
    out.truth.platforms.push_back(std::move(truth));
  }
  return out;
}

nlohmann::ordered_json to_json(const GroundTruth& t) {
  nlohmann::ordered_json j;
  j["seed"] = t.seed;
  j["storm"] = t.storm;
  j["origin"] = format_iso8601_utc(t.origin);
  j["n_days"] = t.n_days;
  j["events"] = {{"trigger_day", 0},
                 {"spillover_day", t.spillover_day},
                 {"appeasement_day", t.appeasement_day},
                 {"consequence_day", t.consequence_day}};
  j["platforms"] = nlohmann::ordered_json::array();
  for (const auto& p : t.platforms) {
    nlohmann::ordered_json q;
    q["name"] = p.name;
    q["kind"] = to_string(p.kind);
    q["start_day"] = p.start_day;
    q["n_messages"] = p.n_messages;
    q["peak_days"] = p.peak_days;
    q["peak_bins"] = p.peak_bins;
    auto names = [](const auto& v) {
      std::vector<std::string> s;
      for (const auto& x : v) s.emplace_back(to_string(x));
      return s;
    };
    q["phase3"] = names(p.phase3);
    q["span4"] = names(p.span4);
    q["daily"] = {{"supporters", p.daily_supporters}, {"opponents", p.daily_opponents}, {"neutral", p.daily_neutral}};
    q["stance_counts"] = p.stance_counts;
    q["phase_counts"] = p.phase_counts;
    q["planted"] = {{"toxic_messages", p.toxic_messages},
                    {"emoji_total", p.emoji_total},
                    {"hashtags", p.hashtags},
                    {"keywords", p.keywords},
                    {"n_authors", p.n_authors},
                    {"frac_gt1", p.frac_gt1},
                    {"frac_gt2", p.frac_gt2},
                    {"replies_to_root", p.replies_to_root},
                    {"replies_to_replies", p.replies_to_replies}};
    j["platforms"].push_back(std::move(q));
  }
  return j;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ArgumentError("spearman: need two equal-length series of size >= 2");
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxx > 0.0 && syy > 0.0 ? sxy / std::sqrt(sxx * syy) : 0.0;
}

ShapeReport shape_report(const std::vector<Corpus>& corpora, const GroundTruth& truth) {
  if (corpora.empty() || truth.platforms.empty()) throw ArgumentError("shape_report: no platforms");
  const auto& origin = corpora[0];
  if (!origin.all_timestamped()) throw DataError("shape_report: origin platform needs timestamps");
  const auto n_days = static_cast<std::size_t>(truth.n_days);
  std::vector<double> sup(n_days, 0.0), opp(n_days, 0.0), total(n_days, 0.0);
  for (const auto& m : origin.messages) {
    const auto day = (*m.timestamp - truth.origin) / 86400;
    if (day < 0 || day >= truth.n_days) continue;
    total[static_cast<std::size_t>(day)] += 1;
    if (!m.stance) continue;
    const int g = m.stance->coarse == Stance::support_target || m.stance->coarse == Stance::support_both ? 0
                  : m.stance->coarse == Stance::oppose_target || m.stance->coarse == Stance::oppose_both  ? 1
                                                                                                          : 2;
    if (g == 0) sup[static_cast<std::size_t>(day)] += 1;
    if (g == 1) opp[static_cast<std::size_t>(day)] += 1;
  }
  auto cv = [](const std::vector<double>& v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return mean > 0.0 ? std::sqrt(ss / static_cast<double>(v.size())) / mean : 0.0;
  };
  ShapeReport r;
  r.supporter_cv = cv(sup);
  r.opponent_cv = cv(opp);
  r.planted_peaks = truth.platforms[0].peak_bins;
  if (std::any_of(total.begin(), total.end(), [](double v) { return v > 0; })) r.detected_peaks = detect_peaks(total);
  r.peaks_match = r.detected_peaks == r.planted_peaks;
  std::vector<double> days, tail;
  for (std::size_t d = static_cast<std::size_t>(truth.consequence_day) + 1; d < n_days; ++d) {
    days.push_back(static_cast<double>(d));
    tail.push_back(total[d]);
  }
  if (days.size() >= 3) r.post_event_spearman = spearman(days, tail);
  if (corpora.size() > 1) {
    const auto& second = corpora[1];
    if (!second.empty() && second.all_timestamped()) {
      UnixSeconds first = *second.messages.front().timestamp;
      for (const auto& m : second.messages) first = std::min(first, *m.timestamp);
      r.platform2_onset_day = static_cast<int>((first - truth.origin) / 86400);
    } else if (truth.platforms.size() > 1) {
      r.platform2_onset_day = truth.platforms[1].start_day;
    }
  }
  return r;
}

} // namespace stormscope

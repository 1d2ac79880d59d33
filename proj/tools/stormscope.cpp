#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "manifest.hpp"
#include "stormscope/classify.hpp"
#include "stormscope/corpus.hpp"
#include "stormscope/error.hpp"
#include "stormscope/features.hpp"
#include "stormscope/groups.hpp"
#include "stormscope/kernels.hpp"
#include "stormscope/render.hpp"
#include "stormscope/stats.hpp"
#include "stormscope/synth.hpp"
#include "stormscope/text.hpp"
#include "stormscope/timeline.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace stormscope;

namespace {

constexpr int kUsageExit = 1;
constexpr int kDataExit = 2;

struct Options {
  std::vector<std::string> corpora;
  std::string lexicon_dir;
  std::string bin_width = "auto";
  double peak_fraction = 0.25;
  std::size_t smoothing = 1;
  std::uint64_t seed = 1;
  double train_fraction = 0.8;
  double l2 = 1.0;
  std::size_t max_iters = 1000;
  double tolerance = 1e-8;
  std::string out;
  std::string fixed_epoch;
  std::size_t top_k = 10;

  // subcommand specific
  std::string export_path, export_kind, lang = "und";
  std::string task = "phase";
  bool balance = false;
  std::string model_path, test_path;
  std::string config_path;
  std::vector<std::string> overrides;
  std::string group_a = "oppose_target", group_b = "support_target";
  std::string title;
};

std::optional<long long> parse_epoch(const std::string& s) {
  if (s.empty()) return std::nullopt;
  if (auto t = parse_iso8601_utc(s)) return *t;
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ArgumentError("--fixed-epoch expects epoch seconds or an ISO-8601 UTC time, got '" + s + "'");
}

Corpus load_corpus(const std::string& path, cli::Run& run) {
  auto parsed = parse_corpus_file(path);
  if (parsed.duplicate_count)
    std::cerr << "stormscope: " << path << ": dropped " << parsed.duplicate_count << " duplicate message id(s)\n";
  normalize(parsed.corpus);
  run.input(path);
  return std::move(parsed.corpus);
}

fs::path lexicon_dir(const Options& o) {
  if (!o.lexicon_dir.empty()) return o.lexicon_dir;
  if (const char* env = std::getenv("STORMSCOPE_LEXICON_DIR"); env && *env) return env;
#ifdef STORMSCOPE_DEFAULT_LEXICON_DIR
  if (fs::is_directory(STORMSCOPE_DEFAULT_LEXICON_DIR)) return STORMSCOPE_DEFAULT_LEXICON_DIR;
#endif
  throw DataError("no lexicon directory: pass --lexicons DIR or set STORMSCOPE_LEXICON_DIR");
}

LexiconSet load_lexicons(const Options& o, cli::Run& run) {
  const auto dir = lexicon_dir(o);
  if (!fs::is_directory(dir)) throw DataError("lexicon directory not found: " + dir.string());
  run.config("lexicons", dir.string());
  return LexiconSet::load_directory(dir);
}

std::string dominant_language(const Corpus& c) {
  std::map<std::string, std::size_t> n;
  for (const auto& m : c.messages) ++n[primary_language(m.lang)];
  std::string best = "und";
  std::size_t top = 0;
  for (const auto& [lang, count] : n)
    if (count > top) best = lang, top = count;
  return best;
}

std::optional<Lexicon> load_stopwords(const Options& o, const std::string& lang) {
  fs::path dir;
  try {
    dir = lexicon_dir(o);
  } catch (const DataError&) {
    return std::nullopt;
  }
  const auto path = dir / lang / "stopwords.tsv";
  if (!fs::exists(path)) return std::nullopt;
  return load_lexicon_file(path, lang);
}

BinSpec resolve_bins(const Options& o, const Corpus& c) {
  if (o.bin_width != "auto") {
    auto spec = parse_bin_spec(o.bin_width);
    if (!spec) throw ArgumentError("--bin-width: expected <n>d, <n>h, <n>m, <n>s, ordinal:<n> or auto");
    return *spec;
  }
  if (c.all_timestamped()) return BinSpec::days(1);
  if (!c.any_timestamped()) return BinSpec::ordinal(50);
  throw DataError("corpus mixes timestamped and timestamp-less messages; pass --bin-width ordinal:<n>");
}

struct TimelineResult {
  TimelineSeries series;
  std::vector<std::size_t> peaks;
  std::optional<PhaseSegmentation> phases;
};

TimelineResult analyse_timeline(const Options& o, const Corpus& c) {
  if (!(o.peak_fraction > 0.0 && o.peak_fraction <= 1.0)) throw ArgumentError("--peak-fraction must lie in (0,1]");
  if (o.smoothing % 2 == 0) throw ArgumentError("--smoothing must be an odd positive integer");
  TimelineResult r;
  r.series = bin_counts(c, resolve_bins(o, c));
  if (r.series.total() == 0) throw DataError("corpus is empty");
  r.peaks = detect_peaks(r.series, o.peak_fraction, o.smoothing);
  if (!r.peaks.empty()) r.phases = segment_phases(r.series.size(), r.peaks);
  return r;
}

void record_common(cli::Run& run, const Options& o) {
  run.config("bin_width", o.bin_width);
  run.config("peak_fraction", o.peak_fraction);
  run.config("smoothing", o.smoothing);
}

template <typename E>
std::vector<std::string> names(const std::vector<E>& v) {
  std::vector<std::string> out;
  for (const auto& x : v) out.emplace_back(to_string(x));
  return out;
}

json timeline_json(const TimelineResult& t, const Options& o) {
  json j;
  j["bin_width"] = to_string(t.series.spec);
  j["peak_fraction"] = o.peak_fraction;
  j["smoothing"] = o.smoothing;
  j["n_bins"] = t.series.size();
  j["n_messages"] = t.series.total();
  const auto labels = render::bin_labels(t.series);
  j["bins"] = json::array();
  for (std::size_t i = 0; i < t.series.size(); ++i) j["bins"].push_back({{"start", labels[i]}, {"count", t.series.counts[i]}});
  j["peaks"] = t.peaks;
  j["peak_starts"] = json::array();
  for (auto p : t.peaks) j["peak_starts"].push_back(labels[p]);
  if (t.phases) {
    j["phase3"] = names(t.phases->phase3);
    j["span4"] = names(t.phases->span4);
    json ranges = json::object();
    for (std::size_t i = 0; i < t.phases->phase3.size(); ++i) {
      const auto key = std::string(to_string(t.phases->phase3[i]));
      if (!ranges.contains(key)) ranges[key] = {{"first_bin", i}, {"last_bin", i}};
      ranges[key]["last_bin"] = i;
    }
    j["phases"] = ranges;
  } else {
    j["phase3"] = nullptr;
    j["span4"] = nullptr;
    j["phases"] = nullptr;
  }
  return j;
}

std::string keywords_csv(const KeywordSeries& ks, const TimelineSeries& series) {
  std::ostringstream out;
  out << "keyword,total";
  for (const auto& l : render::bin_labels(series)) out << ',' << render::csv_field(l);
  out << '\n';
  for (const auto& [word, bins] : ks) {
    std::size_t total = 0;
    for (auto b : bins) total += b;
    out << render::csv_field(word) << ',' << total;
    for (auto b : bins) out << ',' << b;
    out << '\n';
  }
  return out.str();
}

// ---- subcommands ----

void cmd_ingest(const Options& o, cli::Run& run) {
  auto kind = parse_export_kind(o.export_kind);
  if (!kind) throw ArgumentError("--kind must be twitter_v2_json, telegram_export_json or reddit_dump_json");
  std::ifstream in(o.export_path, std::ios::binary);
  if (!in) throw DataError("cannot open export " + o.export_path);
  std::ostringstream raw;
  raw << in.rdbuf();
  run.input(o.export_path);
  run.config("kind", o.export_kind);
  run.config("lang", o.lang);
  auto adapted = adapt_export(raw.str(), *kind, o.lang);
  // Unmapped fields keyed by message id, in export order.
  std::ostringstream side;
  for (std::size_t i = 0; i < adapted.messages.size(); ++i)
    side << json{{"id", adapted.messages[i].id}, {"fields", adapted.side_channel[i]}}.dump() << '\n';
  Corpus c;
  c.messages = std::move(adapted.messages);
  normalize(c);
  std::ostringstream out;
  write_corpus(out, c);
  run.artifact("corpus.jsonl", out.str());
  run.artifact("side_channel.jsonl", side.str());
  std::cerr << "stormscope: ingested " << c.size() << " message(s), skipped " << adapted.skipped << '\n';
}

void cmd_timeline(const Options& o, cli::Run& run) {
  const auto c = load_corpus(o.corpora.at(0), run);
  record_common(run, o);
  const auto t = analyse_timeline(o, c);
  run.artifact("timeline.csv", render::timeline_csv(t.series));
  run.artifact("peaks.json", timeline_json(t, o).dump(2) + "\n");
  run.artifact("timeline.svg", render::timeline_svg(t.series, t.peaks, t.phases ? &*t.phases : nullptr,
                                                    "Messages per bin", run.stamp()));
  if (auto stop = load_stopwords(o, dominant_language(c))) {
    run.config("top_k", o.top_k);
    run.artifact("keywords.csv", keywords_csv(keyword_timeline(c, t.series, o.top_k, *stop), t.series));
  }
}

void cmd_features(const Options& o, cli::Run& run) {
  const auto c = load_corpus(o.corpora.at(0), run);
  const auto lex = load_lexicons(o, run);
  const auto fv = kernels::omp::extract_features(c, lex);
  std::ostringstream out;
  out << "id,lang,n_tokens,n_sentences";
  for (std::size_t k = 0; k < kFeatureCount; ++k) out << ',' << feature_name(feature_at(k));
  out << ",missing_roles\n";
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto& v = fv[i];
    out << render::csv_field(c.messages[i].id) << ',' << render::csv_field(c.messages[i].lang) << ',' << v.n_tokens << ','
        << v.n_sentences;
    for (auto n : v.counts) out << ',' << n;
    out << ',' << render::number(v.avg_sentence_length) << ',';
    bool first = true;
    for (std::size_t r = 0; r < kLexiconRoleCount; ++r)
      if (v.missing_roles & (1u << r)) {
        out << (first ? "" : "|") << to_string(static_cast<LexiconRole>(r));
        first = false;
      }
    out << '\n';
  }
  run.artifact("features.csv", out.str());
  if (!fv.empty()) {
    const auto pm = aggregate_features(fv, Weighting::per_message);
    const auto pt = aggregate_features(fv, Weighting::per_token);
    std::ostringstream agg;
    agg << "feature,per_message,per_token\n";
    for (std::size_t k = 0; k < kFeatureCount; ++k)
      agg << feature_name(feature_at(k)) << ',' << render::number(pm.values[k]) << ',' << render::number(pt.values[k]) << '\n';
    run.artifact("features_summary.csv", agg.str());
  }
}

json participation_json(const Corpus& c) {
  try {
    const auto p = participation_stats(c);
    return {{"n_authors", p.n_authors},
            {"n_authored_messages", p.n_authored_messages},
            {"n_without_author", p.n_without_author},
            {"frac_gt1", p.frac_gt1},
            {"frac_gt2", p.frac_gt2}};
  } catch (const DataError& e) {
    return {{"error", e.what()}, {"n_without_author", c.size()}};
  }
}

json reply_json(const Corpus& c) {
  try {
    const auto r = reply_structure(c);
    return {{"n_roots", r.n_roots},
            {"n_replies_to_root", r.n_replies_to_root},
            {"n_replies_to_replies", r.n_replies_to_replies},
            {"fraction_to_root", r.fraction_to_root}};
  } catch (const DataError& e) {
    return {{"error", e.what()}};
  }
}

json table_json(const FrequencyTable& t) {
  json j = json::array();
  for (const auto& [k, n] : t) j.push_back({{"key", k}, {"count", n}});
  return j;
}

struct StatsResult {
  json summary;
  ToxicityReport toxicity;
  FrequencyTable emojis, hashtags;
};

StatsResult compute_stats(const Corpus& c, const LexiconSet& lex, const TimelineSeries& series) {
  StatsResult r;
  const auto flags = kernels::omp::toxic_flags(c, lex);
  r.toxicity = toxicity_report(c, flags, series);
  const auto tally = kernels::omp::emoji_hashtag_tally(c);
  r.emojis = to_frequency_table(tally.emojis);
  r.hashtags = to_frequency_table(tally.hashtags);
  std::size_t emoji_total = 0;
  for (const auto& [_, n] : r.emojis) emoji_total += n;
  r.summary["n_messages"] = c.size();
  r.summary["participation"] = participation_json(c);
  r.summary["toxicity"] = {{"share", r.toxicity.share}, {"n_flagged", r.toxicity.n_flagged}, {"level", "message"}};
  r.summary["emoji_total"] = emoji_total;
  r.summary["emojis"] = table_json(r.emojis);
  r.summary["hashtags"] = table_json(r.hashtags);
  r.summary["reply_structure"] = reply_json(c);
  return r;
}

void cmd_stats(const Options& o, cli::Run& run) {
  const auto c = load_corpus(o.corpora.at(0), run);
  const auto lex = load_lexicons(o, run);
  run.config("bin_width", o.bin_width);
  const auto series = bin_counts(c, resolve_bins(o, c));
  const auto s = compute_stats(c, lex, series);
  run.artifact("stats.json", s.summary.dump(2) + "\n");
  std::ostringstream part;
  const auto& p = s.summary["participation"];
  part << "n_authors,n_authored_messages,n_without_author,frac_gt1,frac_gt2\n";
  if (p.contains("error"))
    part << "0,0," << c.size() << ",,\n";
  else
    part << p["n_authors"].get<std::size_t>() << ',' << p["n_authored_messages"].get<std::size_t>() << ','
         << p["n_without_author"].get<std::size_t>() << ',' << render::number(p["frac_gt1"].get<double>()) << ','
         << render::number(p["frac_gt2"].get<double>()) << '\n';
  run.artifact("participation.csv", part.str());
  run.artifact("toxicity.csv", render::toxicity_csv(s.toxicity, series));
  run.artifact("toxicity.svg", render::toxicity_bars_svg(s.toxicity, series, "Toxic share per bin", run.stamp()));
  run.artifact("emoji.csv", render::frequency_csv(s.emojis, "emoji"));
  run.artifact("hashtags.csv", render::frequency_csv(s.hashtags, "hashtag"));
}

Stance parse_stance_flag(const std::string& s, const char* flag) {
  auto st = parse_stance(s);
  if (!st) throw ArgumentError(std::string(flag) + ": unknown stance '" + s + "'");
  return *st;
}

void cmd_groups(const Options& o, cli::Run& run) {
  const auto c = load_corpus(o.corpora.at(0), run);
  const auto lex = load_lexicons(o, run);
  const auto a = parse_stance_flag(o.group_a, "--group-a");
  const auto b = parse_stance_flag(o.group_b, "--group-b");
  run.config("bin_width", o.bin_width);
  run.config("group_a", o.group_a);
  run.config("group_b", o.group_b);
  const auto series = bin_counts(c, resolve_bins(o, c));
  const auto dist = group_distribution(c, series);
  run.artifact("distribution.csv", render::distribution_csv(dist, series));
  run.artifact("distribution.svg", render::stacked_area_svg(dist, series, "Stance groups over time", run.stamp()));
  const auto fv = kernels::omp::extract_features(c, lex);
  const auto contrast = contrast_groups(c, fv, a, b);
  run.artifact("contrast.csv", render::contrast_csv(contrast));
  std::ostringstream subs;
  subs << "sub,count";
  for (const auto& l : render::bin_labels(series)) subs << ',' << render::csv_field(l);
  subs << '\n';
  for (const auto& [sub, t] : subgroup_breakdown(c, series)) {
    subs << render::csv_field(sub) << ',' << t.count;
    for (auto n : t.per_bin) subs << ',' << n;
    subs << '\n';
  }
  run.artifact("subgroups.csv", subs.str());
  json j;
  j["n_labeled"] = dist.n_labeled;
  j["n_excluded"] = dist.n_excluded;
  j["group_a"] = {{"stance", o.group_a}, {"n", contrast.empty() ? 0 : contrast.front().n_a}};
  j["group_b"] = {{"stance", o.group_b}, {"n", contrast.empty() ? 0 : contrast.front().n_b}};
  j["effect_size"] = "Cohen's d over per-message per-token rates";
  run.artifact("groups.json", j.dump(2) + "\n");
}

Task parse_task_flag(const std::string& s) {
  auto t = parse_task(s);
  if (!t) throw ArgumentError("--task must be phase or stance");
  return *t;
}

Dataset dataset_for(const Options& o, const Corpus& c, const LexiconSet& lex, Task task) {
  const auto fv = kernels::omp::extract_features(c, lex);
  if (task == Task::stance) return make_dataset(c, task, fv);
  const bool all_gold = std::all_of(c.messages.begin(), c.messages.end(), [](const Message& m) { return m.phase_gold.has_value(); });
  if (all_gold) return make_dataset(c, task, fv);
  const auto t = analyse_timeline(o, c);
  if (!t.phases) throw DataError("no peaks detected, so the corpus cannot be segmented into phases");
  return make_dataset(c, task, fv, &t.series, &*t.phases);
}

json eval_json(const EvalReport& r) {
  json j;
  j["task"] = to_string(r.task);
  j["metric"] = "macro-F1 (unweighted mean over classes; absent classes count as 0)";
  j["model"] = "multinomial logistic regression over the 35 lexicon features";
  j["n"] = r.n;
  j["macro_f1"] = r.macro_f1;
  j["accuracy"] = r.accuracy;
  j["per_class"] = json::object();
  for (std::size_t k = 0; k < r.classes.size(); ++k) {
    const auto& m = r.per_class[k];
    j["per_class"][r.classes[k]] = {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1},
                                    {"support", m.support},     {"absent", m.absent}};
  }
  j["classes"] = r.classes;
  j["confusion"] = r.confusion;
  return j;
}

void cmd_train(const Options& o, cli::Run& run) {
  const auto task = parse_task_flag(o.task);
  const auto lex = load_lexicons(o, run);
  record_common(run, o);
  run.seed(o.seed);
  run.config("task", o.task);
  run.config("train_fraction", o.train_fraction);
  run.config("l2", o.l2);
  run.config("max_iters", o.max_iters);
  run.config("tolerance", o.tolerance);
  run.config("balance", o.balance);
  // Several corpora are pooled; each is segmented on its own timeline.
  Dataset data;
  for (const auto& path : o.corpora) {
    auto part = dataset_for(o, load_corpus(path, run), lex, task);
    data.insert(data.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  if (o.balance) data = balance_classes(data, o.seed);
  const auto sp = split(data, o.seed, o.train_fraction);
  const auto train_set = subset(data, sp.train), test_set = subset(data, sp.test);
  const auto model = train(train_set, task, TrainConfig{o.l2, o.max_iters, o.tolerance});
  std::ostringstream m;
  write_model(m, model);
  run.artifact("model.txt", m.str());
  json j;
  j["task"] = o.task;
  j["n_instances"] = data.size();
  j["n_train"] = train_set.size();
  j["n_test"] = test_set.size();
  j["iterations"] = model.iterations;
  j["gradient_norm"] = model.gradient_norm;
  j["train"] = eval_json(evaluate(model, train_set));
  j["test"] = eval_json(evaluate(model, test_set));
  run.artifact("train_report.json", j.dump(2) + "\n");
  std::ostringstream ids;
  for (const auto& inst : test_set) ids << inst.id << '\n';
  run.artifact("test_ids.txt", ids.str());
}

void cmd_eval(const Options& o, cli::Run& run) {
  std::ifstream in(o.model_path);
  if (!in) throw DataError("cannot open model " + o.model_path);
  const auto model = read_model(in);
  run.input(o.model_path);
  const auto lex = load_lexicons(o, run);
  record_common(run, o);
  const auto data = dataset_for(o, load_corpus(o.test_path, run), lex, model.task);
  run.artifact("eval.json", eval_json(evaluate(model, data)).dump(2) + "\n");
}

void cmd_synth(const Options& o, cli::Run& run, bool seed_given) {
  auto cfg = load_synth_config(o.config_path);
  run.input(o.config_path);
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ArgumentError("--set expects key=value, got '" + kv + "'");
    set_synth_option(cfg, std::string(text::trim(kv.substr(0, eq))), std::string(text::trim(kv.substr(eq + 1))));
  }
  if (seed_given) cfg.seed = o.seed;
  validate(cfg);
  run.config("overrides", o.overrides);
  run.seed(cfg.seed);
  const auto out = generate(cfg);
  for (std::size_t i = 0; i < out.corpora.size(); ++i) {
    std::ostringstream s;
    write_corpus(s, out.corpora[i]);
    run.artifact("p" + std::to_string(i + 1) + ".jsonl", s.str());
  }
  run.artifact("ground_truth.json", to_json(out.truth).dump(2) + "\n");
  const auto shape = shape_report(out.corpora, out.truth);
  json j;
  j["supporter_cv"] = shape.supporter_cv;
  j["opponent_cv"] = shape.opponent_cv;
  j["planted_peaks"] = shape.planted_peaks;
  j["detected_peaks"] = shape.detected_peaks;
  j["peaks_match"] = shape.peaks_match;
  j["post_event_spearman"] = shape.post_event_spearman ? json(*shape.post_event_spearman) : json(nullptr);
  j["platform2_onset_day"] = shape.platform2_onset_day ? json(*shape.platform2_onset_day) : json(nullptr);
  run.artifact("shape.json", j.dump(2) + "\n");
}

// ---- report ----

std::string fixed(double v, int digits = 3) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void cmd_report(const Options& o, cli::Run& run) {
  using render::html_escape;
  const auto& path = o.corpora.at(0);
  const auto c = load_corpus(path, run);
  const auto lex = load_lexicons(o, run);
  record_common(run, o);
  const auto t = analyse_timeline(o, c);
  const auto s = compute_stats(c, lex, t.series);
  const auto labels = render::bin_labels(t.series);
  const std::string title = o.title.empty() ? fs::path(path).stem().string() : o.title;

  std::ostringstream h;
  h << "<!DOCTYPE html>\n<html lang=\"en\"><head><meta charset=\"utf-8\"><title>" << html_escape(title)
    << "</title>\n<style>body{font-family:sans-serif;max-width:860px;margin:2em auto;color:#222}"
       "table{border-collapse:collapse}td,th{border:1px solid #ccc;padding:2px 8px;text-align:right}"
       "th:first-child,td:first-child{text-align:left}</style></head><body>\n";
  h << "<h1>Storm report: " << html_escape(title) << "</h1>\n";
  h << "<p>Generated " << html_escape(run.stamp()) << ". " << c.size() << " messages, " << t.series.size()
    << " bins of " << html_escape(to_string(t.series.spec)) << ".</p>\n";

  h << "<h2>Timeline</h2>\n"
    << render::timeline_svg(t.series, t.peaks, t.phases ? &*t.phases : nullptr, "Messages per bin", std::nullopt);
  h << "<p>Peaks (" << t.peaks.size() << "):";
  for (auto p : t.peaks) h << ' ' << html_escape(labels[p]) << " (bin " << p << ", " << t.series.counts[p] << " messages);";
  h << "</p>\n";
  if (t.phases) {
    h << "<table id=\"phases\"><tr><th>phase</th><th>first bin</th><th>last bin</th><th>messages</th></tr>\n";
    for (Phase ph : {Phase::begin, Phase::middle, Phase::end}) {
      std::optional<std::size_t> lo, hi;
      std::size_t n = 0;
      for (std::size_t i = 0; i < t.phases->phase3.size(); ++i)
        if (t.phases->phase3[i] == ph) {
          if (!lo) lo = i;
          hi = i;
          n += t.series.counts[i];
        }
      h << "<tr><td>" << to_string(ph) << "</td>";
      if (lo)
        h << "<td>" << html_escape(labels[*lo]) << "</td><td>" << html_escape(labels[*hi]) << "</td><td>" << n << "</td>";
      else
        h << "<td colspan=\"3\">empty</td>";
      h << "</tr>\n";
    }
    h << "</table>\n";
  } else {
    h << "<p>No peaks, so no phase segmentation.</p>\n";
  }

  h << "<h2>Participation and replies</h2>\n<table>";
  const auto& p = s.summary["participation"];
  if (p.contains("error")) {
    h << "<tr><td>authors</td><td>no author ids</td></tr>";
  } else {
    h << "<tr><td>authors</td><td>" << p["n_authors"].get<std::size_t>() << "</td></tr>"
      << "<tr><td>share posting more than once</td><td>" << fixed(p["frac_gt1"].get<double>()) << "</td></tr>"
      << "<tr><td>share posting more than twice</td><td>" << fixed(p["frac_gt2"].get<double>()) << "</td></tr>";
  }
  const auto& rs = s.summary["reply_structure"];
  if (!rs.contains("error"))
    h << "<tr><td>replies to the root</td><td>" << rs["n_replies_to_root"].get<std::size_t>() << "</td></tr>"
      << "<tr><td>replies to replies</td><td>" << rs["n_replies_to_replies"].get<std::size_t>() << "</td></tr>";
  h << "</table>\n";

  h << "<h2>Toxicity</h2>\n<p>" << s.toxicity.n_flagged << " of " << s.toxicity.n_messages
    << " messages contain a toxicity-lexicon term (share " << fixed(s.toxicity.share) << ").</p>\n"
    << render::toxicity_bars_svg(s.toxicity, t.series, "Toxic share per bin", std::nullopt);

  auto top_table = [&](const FrequencyTable& table, const char* what) {
    if (table.empty()) {
      h << "<p>No " << what << ".</p>\n";
      return;
    }
    h << "<table><tr><th>" << what << "</th><th>count</th></tr>";
    for (std::size_t i = 0; i < table.size() && i < o.top_k; ++i)
      h << "<tr><td>" << html_escape(table[i].first) << "</td><td>" << table[i].second << "</td></tr>";
    h << "</table>\n";
  };
  h << "<h2>Emojis and hashtags</h2>\n";
  top_table(s.emojis, "emojis");
  top_table(s.hashtags, "hashtags");

  if (auto stop = load_stopwords(o, dominant_language(c))) {
    h << "<h2>Keywords</h2>\n<table><tr><th>keyword</th><th>count</th></tr>";
    for (const auto& [word, bins] : keyword_timeline(c, t.series, o.top_k, *stop)) {
      std::size_t n = 0;
      for (auto b : bins) n += b;
      h << "<tr><td>" << html_escape(word) << "</td><td>" << n << "</td></tr>";
    }
    h << "</table>\n";
  }

  const auto fv = kernels::omp::extract_features(c, lex);
  const bool labeled = std::any_of(c.messages.begin(), c.messages.end(), [](const Message& m) { return m.stance.has_value(); });
  if (labeled) {
    const auto dist = group_distribution(c, t.series);
    h << "<h2>Stance groups</h2>\n<p>" << dist.n_labeled << " labeled, " << dist.n_excluded << " unlabeled.</p>\n"
      << render::stacked_area_svg(dist, t.series, "Stance groups over time", std::nullopt);
    try {
      const auto rows = contrast_groups(c, fv, parse_stance_flag(o.group_a, "--group-a"), parse_stance_flag(o.group_b, "--group-b"));
      h << "<p>Largest feature contrasts, " << html_escape(o.group_a) << " vs " << html_escape(o.group_b)
        << " (per-token rates, Cohen's d):</p>\n<table><tr><th>feature</th><th>rate a</th><th>rate b</th><th>d</th></tr>";
      for (std::size_t i = 0; i < rows.size() && i < o.top_k; ++i)
        h << "<tr><td>" << feature_name(rows[i].feature) << "</td><td>" << fixed(rows[i].rate_a, 4) << "</td><td>"
          << fixed(rows[i].rate_b, 4) << "</td><td>" << (rows[i].degenerate ? "degenerate" : fixed(rows[i].d)) << "</td></tr>";
      h << "</table>\n";
    } catch (const DataError& e) {
      h << "<p>No contrast: " << html_escape(e.what()) << "</p>\n";
    }
  }

  if (!fv.empty()) {
    const auto pt = aggregate_features(fv, Weighting::per_token);
    h << "<h2>Feature rates</h2>\n<table><tr><th>feature</th><th>per token</th></tr>";
    for (std::size_t k = 0; k < kFeatureCount; ++k)
      h << "<tr><td>" << feature_name(feature_at(k)) << "</td><td>" << fixed(pt.values[k], 4) << "</td></tr>";
    h << "</table>\n";
  }
  h << "</body></html>\n";
  run.artifact("report.html", h.str());
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Corpus analytics for cross-platform online outrage storms"};
  app.require_subcommand(1);
  app.set_version_flag("--version", STORMSCOPE_VERSION);
  Options o;

  auto common = [&](CLI::App* sub, bool corpus, bool lexicons) {
    sub->add_option("--out", o.out, "Output directory")->required();
    sub->add_option("--fixed-epoch", o.fixed_epoch, "Timestamp (epoch seconds or ISO-8601) stamped into outputs");
    if (corpus) sub->add_option("--corpus", o.corpora, "Corpus JSONL")->required()->check(CLI::ExistingFile);
    if (lexicons) sub->add_option("--lexicons", o.lexicon_dir, "Lexicon directory (default $STORMSCOPE_LEXICON_DIR)");
  };
  auto timeline_opts = [&](CLI::App* sub) {
    sub->add_option("--bin-width", o.bin_width, "Bin width: <n>d|h|m|s, ordinal:<n> or auto");
    sub->add_option("--peak-fraction", o.peak_fraction, "Minimum peak height relative to the maximum");
    sub->add_option("--smoothing", o.smoothing, "Odd moving-average window");
  };

  auto* ingest = app.add_subcommand("ingest", "Convert a platform export into corpus JSONL");
  common(ingest, false, false);
  ingest->add_option("--export", o.export_path, "Platform export file")->required()->check(CLI::ExistingFile);
  ingest->add_option("--kind", o.export_kind, "twitter_v2_json, telegram_export_json or reddit_dump_json")->required();
  ingest->add_option("--lang", o.lang, "Language tag for all messages");

  auto* timeline = app.add_subcommand("timeline", "Bins, peaks and phases");
  common(timeline, true, true);
  timeline_opts(timeline);
  timeline->add_option("--top-k", o.top_k, "Keywords to track");

  auto* features = app.add_subcommand("features", "Per-message feature vectors");
  common(features, true, true);

  auto* stats = app.add_subcommand("stats", "Participation, toxicity, emoji and hashtag statistics");
  common(stats, true, true);
  stats->add_option("--bin-width", o.bin_width, "Bin width for the per-bin toxicity breakdown");

  auto* groups = app.add_subcommand("groups", "Stance group distribution and feature contrasts");
  common(groups, true, true);
  groups->add_option("--bin-width", o.bin_width, "Bin width");
  groups->add_option("--group-a", o.group_a, "First stance");
  groups->add_option("--group-b", o.group_b, "Second stance");

  auto* train_cmd = app.add_subcommand("train", "Train a phase or stance classifier");
  common(train_cmd, true, true);
  timeline_opts(train_cmd);
  train_cmd->add_option("--task", o.task, "phase or stance");
  train_cmd->add_option("--seed", o.seed, "Split seed");
  train_cmd->add_option("--train-fraction", o.train_fraction, "Training share of the split");
  train_cmd->add_option("--l2", o.l2, "L2 penalty");
  train_cmd->add_option("--max-iters", o.max_iters, "Newton iteration cap");
  train_cmd->add_option("--tolerance", o.tolerance, "Gradient-norm tolerance");
  train_cmd->add_flag("--balance", o.balance, "Downsample every class to the smallest one");

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model on a labeled corpus");
  common(eval_cmd, false, true);
  timeline_opts(eval_cmd);
  eval_cmd->add_option("--model", o.model_path, "Model file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--test", o.test_path, "Labeled corpus JSONL")->required()->check(CLI::ExistingFile);

  auto* synth = app.add_subcommand("synth", "Generate a synthetic two-platform storm");
  common(synth, false, false);
  synth->add_option("--config", o.config_path, "Generator config file")->required()->check(CLI::ExistingFile);
  synth->add_option("--set", o.overrides, "Config override key=value (repeatable)");
  auto* seed_opt = synth->add_option("--seed", o.seed, "Override the config seed");

  auto* report = app.add_subcommand("report", "Self-contained HTML summary of one storm");
  common(report, true, true);
  timeline_opts(report);
  report->add_option("--group-a", o.group_a, "First stance for the contrast table");
  report->add_option("--group-b", o.group_b, "Second stance for the contrast table");
  report->add_option("--top-k", o.top_k, "Rows in top-k tables");
  report->add_option("--title", o.title, "Report title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageExit;
  }

  try {
    auto* sub = app.get_subcommands().front();
    for (auto* single : {timeline, features, stats, groups, report})
      if (sub == single && o.corpora.size() != 1) throw ArgumentError(sub->get_name() + " takes exactly one --corpus");
    cli::Run run(sub->get_name(), o.out, parse_epoch(o.fixed_epoch));
    if (sub == ingest) cmd_ingest(o, run);
    else if (sub == timeline) cmd_timeline(o, run);
    else if (sub == features) cmd_features(o, run);
    else if (sub == stats) cmd_stats(o, run);
    else if (sub == groups) cmd_groups(o, run);
    else if (sub == train_cmd) cmd_train(o, run);
    else if (sub == eval_cmd) cmd_eval(o, run);
    else if (sub == synth) cmd_synth(o, run, seed_opt->count() > 0);
    else if (sub == report) cmd_report(o, run);
    run.finish();
  } catch (const ArgumentError& e) {
    std::cerr << "stormscope: " << e.what() << "\n" << app.help();
    return kUsageExit;
  } catch (const DataError& e) {
    std::cerr << "stormscope: " << e.what() << '\n';
    return kDataExit;
  } catch (const std::exception& e) {
    std::cerr << "stormscope: " << e.what() << '\n';
    return kDataExit;
  }
  return 0;
}

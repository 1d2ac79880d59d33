#include "doctest.h"

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "stormscope/classify.hpp"
#include "stormscope/error.hpp"
#include "stormscope/kernels.hpp"
#include "stormscope/rng.hpp"
#include "stormscope/synth.hpp"

using namespace stormscope;
using testing::day;
using testing::msg;

namespace {

// Three Gaussian blobs in the first two inputs; everything else constant.
Dataset blobs(std::size_t per_class, double spread, std::uint64_t seed) {
  Rng rng(seed);
  const double centers[3][2] = {{0.0, 0.0}, {4.0, 0.0}, {0.0, 4.0}};
  Dataset d;
  for (std::size_t i = 0; i < per_class; ++i)
    for (int k = 0; k < 3; ++k) {
      LabeledInstance inst;
      inst.id = "i" + std::to_string(d.size());
      inst.x[0] = centers[k][0] + spread * rng.normal();
      inst.x[1] = centers[k][1] + spread * rng.normal();
      inst.x[5] = 0.5;
      inst.label = k;
      d.push_back(inst);
    }
  return d;
}

// Blobs overlapping in many dimensions, for tests that need imperfect fits.
Dataset noisy(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d;
  for (std::size_t i = 0; i < n; ++i) {
    LabeledInstance inst;
    inst.id = "n" + std::to_string(i);
    inst.label = static_cast<int>(i % 3);
    for (std::size_t j = 0; j < kFeatureCount; ++j)
      inst.x[j] = std::abs(0.1 * rng.normal() + (j % 3 == static_cast<std::size_t>(inst.label) ? 0.05 : 0.0));
    d.push_back(inst);
  }
  return d;
}

std::string serialize(const Model& m) {
  std::ostringstream out;
  write_model(out, m);
  return out.str();
}

} // namespace

TEST_CASE("task and class names") {
  CHECK(parse_task("phase") == Task::phase);
  CHECK(parse_task("stance") == Task::stance);
  CHECK_FALSE(parse_task("topic").has_value());
  CHECK(class_names(Task::phase) == std::vector<std::string>{"begin", "middle", "end"});
  CHECK(class_names(Task::stance) == std::vector<std::string>{"support", "oppose", "neutral"});
  CHECK(stance_class(Stance::support_both) == 0);
  CHECK(stance_class(Stance::support_target) == 0);
  CHECK(stance_class(Stance::oppose_both) == 1);
  CHECK(stance_class(Stance::off_topic) == 2);
}

TEST_CASE("make_dataset labels from bins, gold phases and stances") {
  Corpus c;
  c.messages = {msg("a", "one two.", Stance::support_both, day(0)), msg("b", "three four.", Stance::oppose_target, day(1)),
                msg("c", "five six.", std::nullopt, day(2)), msg("d", "seven.", Stance::neutral, day(3))};
  normalize(c);
  const auto fv = kernels::serial::extract_features(c, testing::shipped_lexicons());
  const auto series = bin_counts(c, BinSpec::days(1));
  const std::vector<std::size_t> peaks = {0, 2};
  const auto seg = segment_phases(series.size(), peaks);

  auto phase = make_dataset(c, Task::phase, fv, &series, &seg);
  REQUIRE(phase.size() == 4);
  CHECK(phase[0].label == 0); // bin 0 -> begin
  CHECK(phase[1].label == 1);
  CHECK(phase[3].label == 2);

  c.messages[0].phase_gold = Phase::end; // gold wins over the bin
  phase = make_dataset(c, Task::phase, fv, &series, &seg);
  CHECK(phase[0].label == 2);

  const auto stance = make_dataset(c, Task::stance, fv);
  REQUIRE(stance.size() == 3);
  CHECK(stance[0].label == 0);
  CHECK(stance[1].label == 1);
  CHECK(stance[2].label == 2);
  CHECK(stance[0].x[kFeatureCount - 1] == fv[0].avg_sentence_length);

  for (auto& m : c.messages) m.stance.reset();
  CHECK_THROWS_AS(make_dataset(c, Task::stance, fv), DataError);
}

TEST_CASE("split is stratified and seed-determined") {
  Dataset d = noisy(100, 1);
  for (std::size_t i = 0; i < d.size(); ++i) d[i].label = i < 50 ? 0 : (i < 80 ? 1 : 2);
  const auto s = split(d, 42, 0.8);
  CHECK(s.train.size() + s.test.size() == 100);
  CHECK(s.train.size() >= 79);
  CHECK(s.train.size() <= 81);
  std::array<int, 3> train_counts{};
  for (auto i : s.train) ++train_counts[static_cast<std::size_t>(d[i].label)];
  CHECK(std::abs(train_counts[0] - 40) <= 1);
  CHECK(std::abs(train_counts[1] - 24) <= 1);
  CHECK(std::abs(train_counts[2] - 16) <= 1);

  const auto again = split(d, 42, 0.8);
  CHECK(again.train == s.train);
  CHECK(again.test == s.test);

  const auto big = noisy(1000, 2);
  CHECK(split(big, 7, 0.8).train != split(big, 8, 0.8).train);

  CHECK_THROWS_AS(split(d, 1, 0.0), ArgumentError);
  CHECK_THROWS_AS(split(d, 1, 1.0), ArgumentError);
  Dataset lonely = noisy(10, 3);
  for (auto& inst : lonely) inst.label = 0;
  lonely[0].label = 1;
  CHECK_THROWS_AS(split(lonely, 1, 0.8), DataError);
}

TEST_CASE("separable toy set is fit perfectly") {
  const auto d = blobs(30, 0.3, 5);
  const auto m = train(d, Task::phase);
  CHECK(evaluate(m, d).accuracy == 1.0);
  CHECK(m.gradient_norm < 1e-8);
  // Constant inputs get sd 1 and no weight.
  CHECK(m.sd[5] == 1.0);
  for (const auto& row : m.weights) CHECK(row[5] == 0.0);
}

TEST_CASE("training rejects a single class and non-finite inputs") {
  auto d = blobs(5, 0.3, 1);
  for (auto& inst : d) inst.label = 1;
  CHECK_THROWS_AS(train(d, Task::phase), DataError);
  d = blobs(5, 0.3, 1);
  d[3].x[2] = std::nan("");
  CHECK_THROWS_AS(train(d, Task::phase), DataError);
}

TEST_CASE("objective gradient matches central differences") {
  const auto d = noisy(50, 11);
  const Objective obj(d, 1.0);
  Rng rng(13);
  for (int point = 0; point < 5; ++point) {
    std::vector<double> theta(obj.dimension());
    for (auto& t : theta) t = rng.normal();
    const auto g = obj.gradient(theta);
    double err = 0, norm = 0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double h = 1e-5;
      auto up = theta, down = theta;
      up[i] += h;
      down[i] -= h;
      const double fd = (obj.value(up) - obj.value(down)) / (2 * h);
      err += (fd - g[i]) * (fd - g[i]);
      norm += g[i] * g[i];
    }
    CHECK(std::sqrt(err) / std::sqrt(norm) < 1e-4);
  }
}

TEST_CASE("returned gradient norm is below tolerance and matches finite differences") {
  const auto d = noisy(90, 21);
  const auto m = train(d, Task::stance);
  CHECK(m.gradient_norm < 1e-8);
  CHECK(m.iterations < 1000);
}

TEST_CASE("training is deterministic and the model format round-trips") {
  const auto d = noisy(120, 4);
  const auto a = train(d, Task::phase), b = train(d, Task::phase);
  CHECK(serialize(a) == serialize(b));
  std::istringstream in(serialize(a));
  const auto back = read_model(in);
  CHECK(back == a);
  for (const auto& inst : d) CHECK(predict(back, inst.x) == predict(a, inst.x));

  std::istringstream bad("stormscope-model 9\n");
  CHECK_THROWS_AS(read_model(bad), DataError);
}

TEST_CASE("scaling a raw feature leaves predictions unchanged") {
  const auto d = noisy(300, 6);
  auto scaled = d;
  for (auto& inst : scaled) inst.x[4] *= 1000.0;
  const auto a = train(d, Task::phase), b = train(scaled, Task::phase);
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(predict(a, d[i].x) == predict(b, scaled[i].x));
}

TEST_CASE("evaluate closed forms") {
  const std::vector<int> truth = {0, 1, 2, 0, 1, 2};
  auto r = evaluate_predictions(truth, truth, Task::stance);
  CHECK(r.macro_f1 == 1.0);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(r.confusion[i][j] == (i == j ? 2u : 0u));

  std::vector<int> balanced(30), zeros(30, 0);
  for (std::size_t i = 0; i < 30; ++i) balanced[i] = static_cast<int>(i % 3);
  r = evaluate_predictions(balanced, zeros, Task::phase);
  CHECK(r.macro_f1 == doctest::Approx((0.5 + 0 + 0) / 3.0).epsilon(1e-12));
  CHECK_FALSE(r.per_class[1].absent);

  // Class 2 never appears in the truth: F1 0 and flagged.
  const std::vector<int> t2 = {0, 1, 0, 1}, p2 = {0, 1, 2, 1};
  r = evaluate_predictions(t2, p2, Task::phase);
  CHECK(r.per_class[2].absent);
  CHECK(r.per_class[2].f1 == 0.0);
  CHECK(r.macro_f1 == doctest::Approx((2.0 / 3 + 1.0 + 0.0) / 3).epsilon(1e-12));

  CHECK_THROWS_AS(evaluate_predictions(std::vector<int>{}, std::vector<int>{}, Task::phase), ArgumentError);
}

TEST_CASE("hand-built confusion fixture") {
  // truth\pred   0  1  2
  //   0          5  2  1
  //   1          1  6  3
  //   2          0  2  4
  // F1 by 2TP/(2TP+FP+FN): 10/14, 12/20, 8/14 -> macro 22/35.
  const int table[3][3] = {{5, 2, 1}, {1, 6, 3}, {0, 2, 4}};
  std::vector<int> truth, pred;
  for (int t = 0; t < 3; ++t)
    for (int p = 0; p < 3; ++p)
      for (int k = 0; k < table[t][p]; ++k) {
        truth.push_back(t);
        pred.push_back(p);
      }
  const auto r = evaluate_predictions(truth, pred, Task::stance);
  CHECK(std::abs(r.macro_f1 - 22.0 / 35.0) < 1e-12);
  CHECK(std::abs(r.accuracy - 15.0 / 24.0) < 1e-12);
  CHECK(std::abs(r.per_class[0].precision - 5.0 / 6.0) < 1e-12);
  CHECK(std::abs(r.per_class[0].recall - 5.0 / 8.0) < 1e-12);
  CHECK(std::abs(r.per_class[1].f1 - 0.6) < 1e-12);
  CHECK(std::abs(r.per_class[2].f1 - 4.0 / 7.0) < 1e-12);
  for (int t = 0; t < 3; ++t)
    for (int p = 0; p < 3; ++p) CHECK(r.confusion[t][p] == static_cast<std::size_t>(table[t][p]));
}

namespace {

const SynthOutput& separable() {
  static const SynthOutput out = generate(load_synth_config(STORMSCOPE_REPO_DATA "/configs/classify_separable.cfg"));
  return out;
}

} // namespace

TEST_CASE("full synthetic corpus: class counts equal planted counts") {
  const auto& out = separable();
  const auto& c = out.corpora[0];
  const auto& truth = out.truth.platforms[0];
  const auto fv = kernels::omp::extract_features(c, testing::shipped_lexicons());

  std::array<std::size_t, 3> want_stance{};
  for (const auto& [name, n] : truth.stance_counts) want_stance[static_cast<std::size_t>(stance_class(*parse_stance(name)))] += n;
  std::array<std::size_t, 3> got{};
  for (const auto& inst : make_dataset(c, Task::stance, fv)) ++got[static_cast<std::size_t>(inst.label)];
  CHECK(got == want_stance);

  got = {};
  for (const auto& inst : make_dataset(c, Task::phase, fv)) ++got[static_cast<std::size_t>(inst.label)];
  CHECK(got[0] == truth.phase_counts.at("begin"));
  CHECK(got[1] == truth.phase_counts.at("middle"));
  CHECK(got[2] == truth.phase_counts.at("end"));
}

TEST_CASE("shuffled labels fall to chance, real labels beat them") {
  const auto& c = separable().corpora[0];
  const auto fv = kernels::omp::extract_features(c, testing::shipped_lexicons());
  const auto data = balance_classes(make_dataset(c, Task::stance, fv), 1, 300);
  const auto sp = split(data, 2, 0.8);
  const auto tr = subset(data, sp.train), te = subset(data, sp.test);

  double null_sum = 0;
  int real_wins = 0;
  const double real_train = evaluate(train(tr, Task::stance), tr).macro_f1;
  for (std::uint64_t rep = 0; rep < 20; ++rep) {
    auto shuffled = tr;
    std::vector<int> labels;
    for (const auto& inst : shuffled) labels.push_back(inst.label);
    Rng rng(100 + rep);
    rng.shuffle(std::span<int>(labels));
    for (std::size_t i = 0; i < shuffled.size(); ++i) shuffled[i].label = labels[i];
    const auto m = train(shuffled, Task::stance);
    null_sum += evaluate(m, te).macro_f1;
    real_wins += real_train >= evaluate(m, tr).macro_f1;
  }
  CHECK(std::abs(null_sum / 20 - 1.0 / 3) <= 0.08);
  CHECK(real_wins > 10);
}

TEST_CASE("balance_classes downsamples to the smallest class") {
  Dataset d = noisy(90, 9);
  for (std::size_t i = 0; i < 20; ++i) d[i].label = 0;
  const auto b = balance_classes(d, 3);
  std::array<int, 3> n{};
  for (const auto& inst : b) ++n[static_cast<std::size_t>(inst.label)];
  CHECK(n[0] == n[1]);
  CHECK(n[1] == n[2]);
  CHECK(balance_classes(d, 3).size() == b.size());
  CHECK_THROWS_AS(balance_classes(d, 3, 1000), DataError);
}

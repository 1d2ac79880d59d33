#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stormscope/corpus.hpp"
#include "stormscope/features.hpp"
#include "stormscope/lexicon.hpp"
#include "stormscope/timeline.hpp"

namespace stormscope {

enum class Task { phase, stance };
std::string_view to_string(Task t);
std::optional<Task> parse_task(std::string_view s);

/// phase: begin, middle, end. stance: support, oppose, neutral.
const std::vector<std::string>& class_names(Task t);
inline constexpr std::size_t kClassCount = 3;

/// support_* -> support, oppose_* -> oppose, neutral and off_topic -> neutral.
int stance_class(Stance s);

using Inputs = std::array<double, kFeatureCount>;

struct LabeledInstance {
  std::string id;
  Inputs x{}; // per-token rates plus avg_sentence_length
  int label = 0;
};
using Dataset = std::vector<LabeledInstance>;

/// Phase labels come from phase_gold when present, else from the phase of the
/// message's bin. Stance labels skip unlabeled messages; DataError if none remain.
Dataset make_dataset(const Corpus& corpus, Task task, std::span<const FeatureVector> features,
                     const TimelineSeries* series = nullptr, const PhaseSegmentation* segmentation = nullptr);

struct Split {
  std::vector<std::size_t> train; // ascending indices into the dataset
  std::vector<std::size_t> test;
};

/// Stratified shuffle split. Throws ArgumentError for a fraction outside (0,1)
/// and DataError when a present class has fewer than two instances.
Split split(const Dataset& data, std::uint64_t seed, double train_fraction);
Dataset subset(const Dataset& data, std::span<const std::size_t> indices);

/// Downsamples every class to the smallest class size (or `per_class` when given).
Dataset balance_classes(const Dataset& data, std::uint64_t seed, std::optional<std::size_t> per_class = {});

struct TrainConfig {
  double l2 = 1.0;
  std::size_t max_iters = 1000;
  double tolerance = 1e-8;
};

struct Model {
  Task task = Task::phase;
  std::vector<std::string> classes;
  Inputs mean{};
  Inputs sd{};
  std::vector<Inputs> weights; // one row per class, over standardized inputs
  std::vector<double> bias;
  std::size_t iterations = 0;
  double gradient_norm = 0.0;

  friend bool operator==(const Model&, const Model&) = default;
};

/// Multinomial logistic regression: sum of cross-entropy plus l2/2 * |W|^2
/// (bias unpenalized) over standardized inputs, solved by damped Newton.
Model train(const Dataset& data, Task task, const TrainConfig& config = {});

/// The training objective over standardized inputs, exposed for gradient checks.
/// Parameters are laid out class by class: kFeatureCount weights, then the bias.
class Objective {
public:
  Objective(const Dataset& data, double l2);
  std::size_t dimension() const { return kClassCount * (kFeatureCount + 1); }
  double value(std::span<const double> theta) const;
  std::vector<double> gradient(std::span<const double> theta) const;

private:
  std::vector<Inputs> z_;
  std::vector<int> labels_;
  Inputs active_{};
  double l2_;
};

std::array<double, kClassCount> predict_proba(const Model& model, const Inputs& x);
int predict(const Model& model, const Inputs& x);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
  bool absent = false; // no test instances of this class
};

struct EvalReport {
  Task task = Task::phase;
  std::vector<std::string> classes;
  double macro_f1 = 0.0;
  double accuracy = 0.0;
  std::vector<ClassMetrics> per_class;
  std::vector<std::vector<std::size_t>> confusion; // [truth][predicted]
  std::size_t n = 0;
};

EvalReport evaluate_predictions(std::span<const int> truth, std::span<const int> predicted, Task task);
/// Throws ArgumentError on an empty test set.
EvalReport evaluate(const Model& model, const Dataset& test);

void write_model(std::ostream& out, const Model& model);
Model read_model(std::istream& in);

} // namespace stormscope

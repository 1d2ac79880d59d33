#define EIGEN_DONT_PARALLELIZE // training stays single-threaded and bit-reproducible
#include "stormscope/classify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include <Eigen/Dense>

#include "stormscope/error.hpp"
#include "stormscope/rng.hpp"
#include "stormscope/text.hpp"

namespace stormscope {

namespace {

constexpr std::size_t D = kFeatureCount;
constexpr std::size_t K = kClassCount;
constexpr std::size_t kStride = D + 1;

const std::vector<std::string> kPhaseClasses = {"begin", "middle", "end"};
const std::vector<std::string> kStanceClasses = {"support", "oppose", "neutral"};

struct Standardizer {
  Inputs mean{};
  Inputs sd{};
  Inputs active{}; // 1 for features with variance on the training split

  explicit Standardizer(const Dataset& data) {
    const double n = static_cast<double>(data.size());
    for (std::size_t j = 0; j < D; ++j) {
      double m = 0.0;
      for (const auto& inst : data) m += inst.x[j];
      m /= n;
      double ss = 0.0;
      bool varies = false;
      for (const auto& inst : data) {
        ss += (inst.x[j] - m) * (inst.x[j] - m);
        varies = varies || inst.x[j] != data.front().x[j];
      }
      const double s = std::sqrt(ss / n);
      mean[j] = m;
      active[j] = varies && s > 0.0 ? 1.0 : 0.0;
      sd[j] = active[j] != 0.0 ? s : 1.0;
    }
  }
  Standardizer(const Inputs& m, const Inputs& s, const Inputs& a) : mean(m), sd(s), active(a) {}

  Inputs apply(const Inputs& x) const {
    Inputs z{};
    for (std::size_t j = 0; j < D; ++j) z[j] = active[j] != 0.0 ? (x[j] - mean[j]) / sd[j] : 0.0;
    return z;
  }
};

void check_finite(const Dataset& data) {
  for (const auto& inst : data)
    for (double v : inst.x)
      if (!std::isfinite(v)) throw DataError("non-finite feature value in instance " + inst.id);
}

std::array<double, K> softmax(const std::array<double, K>& s) {
  const double mx = *std::max_element(s.begin(), s.end());
  std::array<double, K> p{};
  double sum = 0.0;
  for (std::size_t k = 0; k < K; ++k) sum += (p[k] = std::exp(s[k] - mx));
  for (auto& v : p) v /= sum;
  return p;
}

double log_sum_exp(const std::array<double, K>& s) {
  const double mx = *std::max_element(s.begin(), s.end());
  double sum = 0.0;
  for (double v : s) sum += std::exp(v - mx);
  return mx + std::log(sum);
}

std::array<double, K> scores(std::span<const double> theta, const Inputs& z) {
  std::array<double, K> s{};
  for (std::size_t k = 0; k < K; ++k) {
    const double* w = theta.data() + k * kStride;
    double acc = w[D];
    for (std::size_t j = 0; j < D; ++j) acc += w[j] * z[j];
    s[k] = acc;
  }
  return s;
}

struct Problem {
  std::vector<Inputs> z;
  std::vector<int> y;
  Inputs active{};
  double l2 = 0.0;

  double value(std::span<const double> theta) const {
    double f = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      const auto s = scores(theta, z[i]);
      f += log_sum_exp(s) - s[static_cast<std::size_t>(y[i])];
    }
    double reg = 0.0;
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t j = 0; j < D; ++j) reg += theta[k * kStride + j] * theta[k * kStride + j];
    return f + 0.5 * l2 * reg;
  }

  Eigen::VectorXd gradient(std::span<const double> theta) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(K * kStride));
    for (std::size_t i = 0; i < z.size(); ++i) {
      const auto p = softmax(scores(theta, z[i]));
      for (std::size_t k = 0; k < K; ++k) {
        const double r = p[k] - (static_cast<int>(k) == y[i] ? 1.0 : 0.0);
        for (std::size_t j = 0; j < D; ++j) g[static_cast<Eigen::Index>(k * kStride + j)] += r * z[i][j];
        g[static_cast<Eigen::Index>(k * kStride + D)] += r;
      }
    }
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t j = 0; j < D; ++j)
        g[static_cast<Eigen::Index>(k * kStride + j)] += l2 * theta[k * kStride + j];
    return g;
  }

  Eigen::MatrixXd hessian(std::span<const double> theta) const {
    const auto P = static_cast<Eigen::Index>(K * kStride);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(P, P);
    Eigen::Matrix<double, kStride, 1> zt;
    for (std::size_t i = 0; i < z.size(); ++i) {
      const auto p = softmax(scores(theta, z[i]));
      for (std::size_t j = 0; j < D; ++j) zt[static_cast<Eigen::Index>(j)] = z[i][j];
      zt[D] = 1.0;
      const Eigen::Matrix<double, kStride, kStride> outer = zt * zt.transpose();
      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t l = k; l < K; ++l) {
          const double c = p[k] * ((k == l ? 1.0 : 0.0) - p[l]);
          h.block<kStride, kStride>(static_cast<Eigen::Index>(k * kStride), static_cast<Eigen::Index>(l * kStride)) +=
              c * outer;
        }
    }
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t l = k + 1; l < K; ++l)
        h.block<kStride, kStride>(static_cast<Eigen::Index>(l * kStride), static_cast<Eigen::Index>(k * kStride)) =
            h.block<kStride, kStride>(static_cast<Eigen::Index>(k * kStride), static_cast<Eigen::Index>(l * kStride))
                .transpose();
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t j = 0; j < D; ++j) h(static_cast<Eigen::Index>(k * kStride + j), static_cast<Eigen::Index>(k * kStride + j)) += l2;
    return h;
  }
};

Problem make_problem(const Dataset& data, const Standardizer& st, double l2) {
  Problem p;
  p.l2 = l2;
  p.active = st.active;
  p.z.reserve(data.size());
  for (const auto& inst : data) {
    if (inst.label < 0 || inst.label >= static_cast<int>(K)) throw ArgumentError("label out of range in " + inst.id);
    p.z.push_back(st.apply(inst.x));
    p.y.push_back(inst.label);
  }
  return p;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace

std::string_view to_string(Task t) { return t == Task::phase ? "phase" : "stance"; }

std::optional<Task> parse_task(std::string_view s) {
  if (s == "phase") return Task::phase;
  if (s == "stance") return Task::stance;
  return std::nullopt;
}

const std::vector<std::string>& class_names(Task t) { return t == Task::phase ? kPhaseClasses : kStanceClasses; }

int stance_class(Stance s) {
  switch (s) {
    case Stance::support_target:
    case Stance::support_both: return 0;
    case Stance::oppose_target:
    case Stance::oppose_both: return 1;
    case Stance::neutral:
    case Stance::off_topic: return 2;
  }
  return 2;
}

Dataset make_dataset(const Corpus& corpus, Task task, std::span<const FeatureVector> features,
                     const TimelineSeries* series, const PhaseSegmentation* segmentation) {
  if (features.size() != corpus.size()) throw ArgumentError("make_dataset: one feature vector per message");
  if (series && series->message_bins.size() != corpus.size())
    throw ArgumentError("make_dataset: series was not built from this corpus");
  Dataset out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& m = corpus.messages[i];
    int label = 0;
    if (task == Task::stance) {
      if (!m.stance) continue;
      label = stance_class(m.stance->coarse);
    } else if (m.phase_gold) {
      label = static_cast<int>(*m.phase_gold);
    } else {
      if (!series || !segmentation) throw DataError("make_dataset: message " + m.id + " has no phase_gold and no segmentation was given");
      label = static_cast<int>(segmentation->phase3.at(series->message_bins[i]));
    }
    out.push_back({m.id, per_token_rates(features[i]), label});
  }
  if (out.empty()) throw DataError("make_dataset: no labeled messages for task " + std::string(to_string(task)));
  return out;
}

Split split(const Dataset& data, std::uint64_t seed, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ArgumentError("train_fraction must lie in (0, 1)");
  std::array<std::vector<std::size_t>, K> by_class;
  for (std::size_t i = 0; i < data.size(); ++i) by_class.at(static_cast<std::size_t>(data[i].label)).push_back(i);
  Rng rng(seed);
  Split s;
  for (std::size_t k = 0; k < K; ++k) {
    auto& idx = by_class[k];
    if (idx.empty()) continue;
    if (idx.size() < 2) throw DataError("split: class " + std::to_string(k) + " has fewer than 2 instances");
    rng.shuffle(std::span<std::size_t>(idx));
    auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(idx.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, idx.size() - 1);
    s.train.insert(s.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.test.insert(s.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

Dataset subset(const Dataset& data, std::span<const std::size_t> indices) {
  Dataset out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(data.at(i));
  return out;
}

Dataset balance_classes(const Dataset& data, std::uint64_t seed, std::optional<std::size_t> per_class) {
  std::array<std::vector<std::size_t>, K> by_class;
  for (std::size_t i = 0; i < data.size(); ++i) by_class.at(static_cast<std::size_t>(data[i].label)).push_back(i);
  std::size_t smallest = SIZE_MAX;
  for (const auto& c : by_class)
    if (!c.empty()) smallest = std::min(smallest, c.size());
  if (smallest == SIZE_MAX) return {};
  const std::size_t take = per_class.value_or(smallest);
  if (take > smallest) throw DataError("balance_classes: a class has only " + std::to_string(smallest) + " instances");
  Rng rng(seed);
  std::vector<std::size_t> keep;
  for (auto& c : by_class) {
    if (c.empty()) continue;
    rng.shuffle(std::span<std::size_t>(c));
    keep.insert(keep.end(), c.begin(), c.begin() + static_cast<std::ptrdiff_t>(take));
  }
  std::sort(keep.begin(), keep.end());
  return subset(data, keep);
}

Objective::Objective(const Dataset& data, double l2) : l2_(l2) {
  if (data.empty()) throw ArgumentError("Objective: empty dataset");
  check_finite(data);
  const Standardizer st(data);
  active_ = st.active;
  for (const auto& inst : data) {
    z_.push_back(st.apply(inst.x));
    labels_.push_back(inst.label);
  }
}

double Objective::value(std::span<const double> theta) const {
  if (theta.size() != dimension()) throw ArgumentError("Objective: wrong parameter dimension");
  return Problem{z_, labels_, active_, l2_}.value(theta);
}

std::vector<double> Objective::gradient(std::span<const double> theta) const {
  if (theta.size() != dimension()) throw ArgumentError("Objective: wrong parameter dimension");
  const auto g = Problem{z_, labels_, active_, l2_}.gradient(theta);
  return {g.data(), g.data() + g.size()};
}

Model train(const Dataset& data, Task task, const TrainConfig& config) {
  if (data.empty()) throw DataError("train: empty training set");
  if (!(config.l2 >= 0.0) || !(config.tolerance > 0.0)) throw ArgumentError("train: l2 must be >= 0, tolerance > 0");
  check_finite(data);
  std::array<std::size_t, K> counts{};
  for (const auto& inst : data) ++counts.at(static_cast<std::size_t>(inst.label));
  if (std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) < 2)
    throw DataError("train: training set has a single class");

  const Standardizer st(data);
  const Problem prob = make_problem(data, st, config.l2);

  // Free coordinates: weights of varying features, and every bias.
  std::vector<Eigen::Index> free;
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t j = 0; j <= D; ++j)
      if (j == D || st.active[j] != 0.0) free.push_back(static_cast<Eigen::Index>(k * kStride + j));
  const auto nf = static_cast<Eigen::Index>(free.size());

  std::vector<double> theta(K * kStride, 0.0);
  double f = prob.value(theta);
  Eigen::VectorXd g = prob.gradient(theta);
  std::size_t iter = 0;
  for (; iter < config.max_iters && g.norm() >= config.tolerance; ++iter) {
    const Eigen::MatrixXd h = prob.hessian(theta);
    Eigen::MatrixXd hf(nf, nf);
    Eigen::VectorXd gf(nf);
    for (Eigen::Index a = 0; a < nf; ++a) {
      gf[a] = g[free[static_cast<std::size_t>(a)]];
      for (Eigen::Index b = 0; b < nf; ++b) hf(a, b) = h(free[static_cast<std::size_t>(a)], free[static_cast<std::size_t>(b)]);
    }
    // The bias block is singular along the all-ones direction; a tiny ridge keeps the solve defined.
    hf.diagonal().array() += 1e-10 * (1.0 + hf.diagonal().cwiseAbs().maxCoeff());
    Eigen::VectorXd step = hf.ldlt().solve(-gf);
    double slope = gf.dot(step);
    if (!step.allFinite() || slope >= 0.0) {
      step = -gf;
      slope = -gf.squaredNorm();
    }
    double t = 1.0;
    std::vector<double> trial(theta);
    double f_trial = f;
    bool accepted = false;
    for (int halvings = 0; halvings < 60 && !accepted; ++halvings, t *= 0.5) {
      trial = theta;
      for (Eigen::Index a = 0; a < nf; ++a) trial[static_cast<std::size_t>(free[static_cast<std::size_t>(a)])] += t * step[a];
      f_trial = prob.value(trial);
      accepted = f_trial <= f + 1e-4 * t * slope;
    }
    if (!accepted || !(f_trial < f)) {
      // The objective no longer resolves the decrease; near the optimum the
      // full Newton step still shrinks the gradient, so take it while it does.
      trial = theta;
      for (Eigen::Index a = 0; a < nf; ++a) trial[static_cast<std::size_t>(free[static_cast<std::size_t>(a)])] += step[a];
      Eigen::VectorXd g_trial = prob.gradient(trial);
      if (!(g_trial.norm() < g.norm())) break;
      theta = std::move(trial);
      f = prob.value(theta);
      g = std::move(g_trial);
      continue;
    }
    theta = std::move(trial);
    f = f_trial;
    g = prob.gradient(theta);
  }

  Model m;
  m.task = task;
  m.classes = class_names(task);
  m.mean = st.mean;
  m.sd = st.sd;
  m.weights.assign(K, Inputs{});
  m.bias.assign(K, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t j = 0; j < D; ++j) m.weights[k][j] = st.active[j] != 0.0 ? theta[k * kStride + j] : 0.0;
    m.bias[k] = theta[k * kStride + D];
  }
  m.iterations = iter;
  m.gradient_norm = g.norm();
  return m;
}

std::array<double, kClassCount> predict_proba(const Model& model, const Inputs& x) {
  std::array<double, K> s{};
  for (std::size_t k = 0; k < K; ++k) {
    double acc = model.bias[k];
    for (std::size_t j = 0; j < D; ++j)
      if (model.weights[k][j] != 0.0) acc += model.weights[k][j] * ((x[j] - model.mean[j]) / model.sd[j]);
    s[k] = acc;
  }
  return softmax(s);
}

int predict(const Model& model, const Inputs& x) {
  const auto p = predict_proba(model, x);
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

EvalReport evaluate_predictions(std::span<const int> truth, std::span<const int> predicted, Task task) {
  if (truth.size() != predicted.size()) throw ArgumentError("evaluate: size mismatch");
  if (truth.empty()) throw ArgumentError("evaluate: empty test set");
  EvalReport r;
  r.task = task;
  r.classes = class_names(task);
  r.n = truth.size();
  r.confusion.assign(K, std::vector<std::size_t>(K, 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++r.confusion.at(static_cast<std::size_t>(truth[i])).at(static_cast<std::size_t>(predicted[i]));
    correct += truth[i] == predicted[i];
  }
  r.accuracy = static_cast<double>(correct) / static_cast<double>(r.n);
  double sum_f1 = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    ClassMetrics c;
    std::size_t predicted_k = 0;
    for (std::size_t t = 0; t < K; ++t) predicted_k += r.confusion[t][k];
    for (std::size_t p = 0; p < K; ++p) c.support += r.confusion[k][p];
    const double tp = static_cast<double>(r.confusion[k][k]);
    c.absent = c.support == 0;
    c.precision = predicted_k ? tp / static_cast<double>(predicted_k) : 0.0;
    c.recall = c.support ? tp / static_cast<double>(c.support) : 0.0;
    c.f1 = c.precision + c.recall > 0.0 ? 2.0 * c.precision * c.recall / (c.precision + c.recall) : 0.0;
    sum_f1 += c.f1;
    r.per_class.push_back(c);
  }
  r.macro_f1 = sum_f1 / static_cast<double>(K);
  return r;
}

EvalReport evaluate(const Model& model, const Dataset& test) {
  std::vector<int> truth, pred;
  truth.reserve(test.size());
  pred.reserve(test.size());
  for (const auto& inst : test) {
    truth.push_back(inst.label);
    pred.push_back(predict(model, inst.x));
  }
  return evaluate_predictions(truth, pred, model.task);
}

void write_model(std::ostream& out, const Model& model) {
  auto row = [&](std::string_view key, std::span<const double> values) {
    out << key;
    for (double v : values) out << ' ' << format_double(v);
    out << '\n';
  };
  out << "stormscope-model 1\n";
  out << "task " << to_string(model.task) << '\n';
  out << "classes";
  for (const auto& c : model.classes) out << ' ' << c;
  out << "\nfeatures";
  for (std::size_t j = 0; j < D; ++j) out << ' ' << feature_name(feature_at(j));
  out << '\n';
  row("mean", model.mean);
  row("sd", model.sd);
  for (std::size_t k = 0; k < model.weights.size(); ++k) row("weights " + model.classes[k], model.weights[k]);
  row("bias", model.bias);
  out << "iterations " << model.iterations << '\n';
  out << "gradient_norm " << format_double(model.gradient_norm) << '\n';
}

Model read_model(std::istream& in) {
  std::map<std::string, std::vector<std::string>> rows;
  std::vector<std::string> order;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::vector<std::string> parts;
    for (std::string w; ls >> w;) parts.push_back(w);
    if (parts.empty()) continue;
    std::string key = parts[0];
    std::size_t skip = 1;
    if (key == "weights") {
      if (parts.size() < 2) throw DataError("model: malformed weights row at line " + std::to_string(line_no));
      key += " " + parts[1];
      skip = 2;
    }
    rows[key] = std::vector<std::string>(parts.begin() + static_cast<std::ptrdiff_t>(skip), parts.end());
    order.push_back(key);
  }
  if (order.empty() || order[0] != "stormscope-model" || rows["stormscope-model"] != std::vector<std::string>{"1"})
    throw DataError("model: unsupported header (expected 'stormscope-model 1')");
  auto need = [&](const std::string& key) -> const std::vector<std::string>& {
    auto it = rows.find(key);
    if (it == rows.end()) throw DataError("model: missing row " + key);
    return it->second;
  };
  auto numbers = [&](const std::string& key, std::size_t n) {
    const auto& v = need(key);
    if (v.size() != n) throw DataError("model: row " + key + " needs " + std::to_string(n) + " values");
    std::vector<double> out;
    for (const auto& s : v) {
      char* end = nullptr;
      const double d = std::strtod(s.c_str(), &end);
      if (end != s.c_str() + s.size() || !std::isfinite(d)) throw DataError("model: bad number '" + s + "' in row " + key);
      out.push_back(d);
    }
    return out;
  };
  auto to_inputs = [](const std::vector<double>& v) {
    Inputs a{};
    std::copy(v.begin(), v.end(), a.begin());
    return a;
  };
  Model m;
  const auto& task = need("task");
  if (task.size() != 1 || !parse_task(task[0])) throw DataError("model: bad task row");
  m.task = *parse_task(task[0]);
  m.classes = need("classes");
  if (m.classes != class_names(m.task)) throw DataError("model: class list does not match task");
  const auto& feats = need("features");
  if (feats.size() != D) throw DataError("model: expected " + std::to_string(D) + " features");
  for (std::size_t j = 0; j < D; ++j)
    if (feats[j] != feature_name(feature_at(j))) throw DataError("model: unexpected feature " + feats[j]);
  m.mean = to_inputs(numbers("mean", D));
  m.sd = to_inputs(numbers("sd", D));
  for (const auto& c : m.classes) m.weights.push_back(to_inputs(numbers("weights " + c, D)));
  m.bias = numbers("bias", K);
  const auto& it = need("iterations");
  if (it.size() != 1) throw DataError("model: bad iterations row");
  m.iterations = std::stoull(it[0]);
  m.gradient_norm = numbers("gradient_norm", 1)[0];
  for (double s : m.sd)
    if (!(s > 0.0)) throw DataError("model: sd values must be positive");
  return m;
}

} // namespace stormscope

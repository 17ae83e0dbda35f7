#include "xfer/model.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <set>

#include "xfer/ensemble.hpp"

namespace xfer {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

uint64_t fnv1a(uint64_t h, const char* data, size_t len) {
  for (size_t i = 0; i < len; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001b3ULL;
  }
  return h;
}

uint64_t fnv1a(uint64_t h, const std::string& s) {
  h = fnv1a(h, s.data(), s.size());
  char sep = '\x1f';
  return fnv1a(h, &sep, 1);
}

uint64_t fnv1a(uint64_t h, int v) {
  char buf[sizeof(int)];
  std::memcpy(buf, &v, sizeof(int));
  return fnv1a(h, buf, sizeof(int));
}

struct Hasher {
  uint64_t seed;
  uint32_t mask;

  uint32_t finish(uint64_t h) const { return static_cast<uint32_t>(h) & mask; }
};

Hasher hasher_for(const ScoringModel& m) {
  return Hasher{m.hash_seed, static_cast<uint32_t>(m.dim() - 1)};
}

const std::string kRootForm = "<ROOT>";
const std::string kRootUpos = "<ROOT>";

int dist_bucket(int head, int dep) {
  int d = head - dep;
  int b = std::min(std::abs(d), 5);
  return d < 0 ? -b : b;
}

}  // namespace

ScoringModel ScoringModel::make(Task task, std::vector<std::string> inventory,
                                int hash_bits, uint64_t hash_seed) {
  ScoringModel m;
  m.task = task;
  m.inventory = std::move(inventory);
  m.hash_bits = hash_bits;
  m.hash_seed = hash_seed;
  m.weights.assign(m.dim(), 0.0);
  if (m.inventory.empty()) throw ModelError("empty label/tag inventory");
  return m;
}

std::vector<std::string> ScoringModel::template_names() const {
  if (task == Task::Parsing)
    return {"hf.df.l", "hu.du.l", "hf.l", "df.l", "hu.l",
            "du.l",    "dist.l",  "hu.du.dist.l"};
  return {"f.t", "pre.t", "bias.t", "trans"};
}

FeatureVec arc_features(const ScoringModel& model, const Sentence& sentence,
                        int head, int dep, int label) {
  const Hasher h = hasher_for(model);
  const std::string& hf =
      head == 0 ? kRootForm : sentence.tokens[head - 1].form;
  const std::string& hu =
      head == 0 ? kRootUpos : sentence.tokens[head - 1].upos;
  const std::string& df = sentence.tokens[dep - 1].form;
  const std::string& du = sentence.tokens[dep - 1].upos;
  const std::string& lab = model.inventory[label];
  const int dist = dist_bucket(head, dep);

  FeatureVec out;
  out.reserve(8);
  uint64_t base = fnv1a(h.seed, lab);
  auto emit = [&](int tmpl, auto... parts) {
    uint64_t v = fnv1a(base, tmpl);
    ((v = fnv1a(v, parts)), ...);
    out.push_back(h.finish(v));
  };
  emit(0, hf, df);
  emit(1, hu, du);
  emit(2, hf);
  emit(3, df);
  emit(4, hu);
  emit(5, du);
  emit(6, dist);
  emit(7, hu, du, dist);
  return out;
}

FeatureVec emit_features(const ScoringModel& model, const Sentence& sentence,
                         int pos, int tag) {
  const Hasher h = hasher_for(model);
  const std::string& tg = model.inventory[tag];
  uint64_t base = fnv1a(h.seed, tg);
  FeatureVec out;
  out.reserve(3);
  auto emit = [&](int tmpl, auto... parts) {
    uint64_t v = fnv1a(base, tmpl);
    ((v = fnv1a(v, parts)), ...);
    out.push_back(h.finish(v));
  };
  const std::string& form = sentence.tokens[pos - 1].form;
  emit(0, form);
  emit(1, form.substr(0, 2));
  emit(2, 0);
  return out;
}

uint32_t trans_feature(const ScoringModel& model, int tag, int tag2) {
  const Hasher h = hasher_for(model);
  uint64_t v = fnv1a(h.seed, 100);
  v = fnv1a(v, model.inventory[tag]);
  v = fnv1a(v, model.inventory[tag2]);
  return h.finish(v);
}

ArcScores score_arcs(const ScoringModel& model, const Sentence& sentence) {
  if (model.task != Task::Parsing)
    throw ModelError("score_arcs called on a tagging model");
  const int n = sentence.size();
  const int L = static_cast<int>(model.inventory.size());
  ArcScores scores(n, model.inventory);
  for (int i = 0; i <= n; ++i)
    for (int j = 1; j <= n; ++j) {
      if (i == j) continue;
      for (int l = 0; l < L; ++l) {
        double s = 0.0;
        for (uint32_t f : arc_features(model, sentence, i, j, l))
          s += model.weights[f];
        scores.at(i, j, l) = s;
      }
    }
  return scores;
}

ChainScores score_chain(const ScoringModel& model, const Sentence& sentence) {
  if (model.task != Task::Tagging)
    throw ModelError("score_chain called on a parsing model");
  const int n = sentence.size();
  const int T = static_cast<int>(model.inventory.size());
  ChainScores scores(n, model.inventory);
  for (int j = 1; j <= n; ++j)
    for (int t = 0; t < T; ++t) {
      double s = 0.0;
      for (uint32_t f : emit_features(model, sentence, j, t))
        s += model.weights[f];
      scores.emit_at(j, t) = s;
    }
  for (int t = 0; t < T; ++t)
    for (int t2 = 0; t2 < T; ++t2)
      scores.trans_at(t, t2) = model.weights[trans_feature(model, t, t2)];
  return scores;
}

namespace {

// log of the chart-restricted unnormalized mass: masked partition plus the
// explicit extras (disjoint from the mask by construction).
double chart_log_mass(const ArcScores& scores, const DepChart& chart,
                      double* masked_z, std::vector<double>* extra_scores) {
  double mz = dep_log_partition(scores, chart.mask);
  double m = mz;
  std::vector<double> es;
  for (const auto& t : chart.extras) {
    es.push_back(tree_score(scores, t));
    m = log_add(m, es.back());
  }
  if (masked_z) *masked_z = mz;
  if (extra_scores) *extra_scores = std::move(es);
  return m;
}

double chart_log_mass(const ChainScores& scores, const ChainChart& chart,
                      double* masked_z, std::vector<double>* extra_scores) {
  double mz = chain_log_partition(scores, chart.mask);
  double m = mz;
  std::vector<double> es;
  for (const auto& s : chart.extras) {
    es.push_back(sequence_score(scores, s));
    m = log_add(m, es.back());
  }
  if (masked_z) *masked_z = mz;
  if (extra_scores) *extra_scores = std::move(es);
  return m;
}

}  // namespace

double chart_log_prob(const ScoringModel& model, const Sentence& sentence,
                      const DepChart& chart) {
  ArcScores scores = score_arcs(model, sentence);
  double mass = chart_log_mass(scores, chart, nullptr, nullptr);
  if (mass == kNegInf)
    throw ModelError("empty chart for sentence '" + sentence.id + "'");
  double full = dep_log_partition(scores);
  return std::min(mass - full, 0.0);
}

double chart_log_prob(const ScoringModel& model, const Sentence& sentence,
                      const ChainChart& chart) {
  ChainScores scores = score_chain(model, sentence);
  double mass = chart_log_mass(scores, chart, nullptr, nullptr);
  if (mass == kNegInf)
    throw ModelError("empty chart for sentence '" + sentence.id + "'");
  double full = chain_log_partition(scores);
  return std::min(mass - full, 0.0);
}

namespace {

void add_regularizer(const ScoringModel& model, double lambda,
                     const std::vector<double>& theta0, LossGrad& lg) {
  if (lambda == 0.0) return;
  if (theta0.size() != model.weights.size())
    throw ModelError("theta0 dimension mismatch");
  for (size_t i = 0; i < model.weights.size(); ++i) {
    double d = model.weights[i] - theta0[i];
    lg.loss += lambda * d * d;
    lg.grad[i] += 2.0 * lambda * d;
  }
}

}  // namespace

LossGrad loss_and_gradient(const ScoringModel& model,
                           const std::vector<DepExample>& batch, double lambda,
                           const std::vector<double>& theta0) {
  if (batch.empty()) throw ModelError("empty batch");
  LossGrad lg;
  lg.grad.assign(model.dim(), 0.0);
  const int L = static_cast<int>(model.inventory.size());
  for (const auto& ex : batch) {
    const int n = ex.sentence.size();
    ArcScores scores = score_arcs(model, ex.sentence);
    double full = dep_log_partition(scores);
    double masked_z;
    std::vector<double> extra_scores;
    double mass = chart_log_mass(scores, ex.chart, &masked_z, &extra_scores);
    if (mass == kNegInf)
      throw ModelError("empty chart for sentence '" + ex.sentence.id + "'");
    lg.loss += full - mass;

    SubstructureDist mu_full = arc_marginals(scores);
    SubstructureDist mu_chart;
    mu_chart.pos.assign(n, std::vector<double>((n + 1) * L, 0.0));
    if (masked_z != kNegInf) {
      double w = std::exp(masked_z - mass);
      SubstructureDist mu_masked = arc_marginals(scores, ex.chart.mask);
      for (int j = 0; j < n; ++j)
        for (size_t c = 0; c < mu_chart.pos[j].size(); ++c)
          mu_chart.pos[j][c] += w * mu_masked.pos[j][c];
    }
    for (size_t e = 0; e < ex.chart.extras.size(); ++e) {
      double w = std::exp(extra_scores[e] - mass);
      const DepTree& t = ex.chart.extras[e];
      for (int j = 1; j <= n; ++j)
        mu_chart.pos[j - 1][t.head[j - 1] * L + t.label[j - 1]] += w;
    }
    for (int i = 0; i <= n; ++i)
      for (int j = 1; j <= n; ++j) {
        if (i == j) continue;
        for (int l = 0; l < L; ++l) {
          double coeff =
              mu_full.pos[j - 1][i * L + l] - mu_chart.pos[j - 1][i * L + l];
          if (coeff == 0.0) continue;
          for (uint32_t f : arc_features(model, ex.sentence, i, j, l))
            lg.grad[f] += coeff;
        }
      }
  }
  add_regularizer(model, lambda, theta0, lg);
  return lg;
}

LossGrad loss_and_gradient(const ScoringModel& model,
                           const std::vector<ChainExample>& batch,
                           double lambda, const std::vector<double>& theta0) {
  if (batch.empty()) throw ModelError("empty batch");
  LossGrad lg;
  lg.grad.assign(model.dim(), 0.0);
  const int T = static_cast<int>(model.inventory.size());
  for (const auto& ex : batch) {
    const int n = ex.sentence.size();
    ChainScores scores = score_chain(model, ex.sentence);
    PairMask full_mask = PairMask::full(n, T);
    double full = chain_log_partition(scores);
    double masked_z;
    std::vector<double> extra_scores;
    double mass = chart_log_mass(scores, ex.chart, &masked_z, &extra_scores);
    if (mass == kNegInf)
      throw ModelError("empty chart for sentence '" + ex.sentence.id + "'");
    lg.loss += full - mass;

    auto u_full = unary_marginals(scores, full_mask);
    std::vector<double> p_full(T * T, 0.0);
    if (n > 1) {
      SubstructureDist pm = pair_marginals(scores, full_mask);
      for (const auto& row : pm.pos)
        for (int c = 0; c < T * T; ++c) p_full[c] += row[c];
    }

    std::vector<std::vector<double>> u_chart(n, std::vector<double>(T, 0.0));
    std::vector<double> p_chart(T * T, 0.0);
    if (masked_z != kNegInf) {
      double w = std::exp(masked_z - mass);
      auto u_masked = unary_marginals(scores, ex.chart.mask);
      for (int j = 0; j < n; ++j)
        for (int t = 0; t < T; ++t) u_chart[j][t] += w * u_masked[j][t];
      if (n > 1) {
        SubstructureDist pm = pair_marginals(scores, ex.chart.mask);
        for (const auto& row : pm.pos)
          for (int c = 0; c < T * T; ++c) p_chart[c] += w * row[c];
      }
    }
    for (size_t e = 0; e < ex.chart.extras.size(); ++e) {
      double w = std::exp(extra_scores[e] - mass);
      const TagSeq& s = ex.chart.extras[e];
      for (int j = 1; j <= n; ++j) {
        u_chart[j - 1][s.tag[j - 1]] += w;
        if (j > 1) p_chart[s.tag[j - 2] * T + s.tag[j - 1]] += w;
      }
    }

    for (int j = 1; j <= n; ++j)
      for (int t = 0; t < T; ++t) {
        double coeff = u_full[j - 1][t] - u_chart[j - 1][t];
        if (coeff == 0.0) continue;
        for (uint32_t f : emit_features(model, ex.sentence, j, t))
          lg.grad[f] += coeff;
      }
    for (int t = 0; t < T; ++t)
      for (int t2 = 0; t2 < T; ++t2) {
        double coeff = p_full[t * T + t2] - p_chart[t * T + t2];
        if (coeff != 0.0) lg.grad[trans_feature(model, t, t2)] += coeff;
      }
  }
  add_regularizer(model, lambda, theta0, lg);
  return lg;
}

TrainConfig TrainConfig::defaults(Task task) {
  TrainConfig c;
  if (task == Task::Tagging) {
    c.eta = 2.6e-4;
    c.lambda = 4.7e-3;
    c.length_cap = 60;
  }
  return c;
}

EnsembleSpec EnsembleSpec::uniform(std::vector<ScoringModel> sources) {
  EnsembleSpec e;
  e.alphas.assign(sources.size(), 1.0 / double(sources.size()));
  e.sources = std::move(sources);
  return e;
}

namespace {

thread_local std::vector<double> g_epoch_losses;

template <typename Example>
ScoringModel run_training(ScoringModel model, std::vector<Example> examples,
                          const TrainConfig& config,
                          const std::vector<double>& theta0) {
  g_epoch_losses.clear();
  std::mt19937_64 rng(config.seed);
  std::vector<size_t> order(examples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  const int batch_size = std::max(config.batch_size, 1);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (size_t start = 0; start < order.size(); start += batch_size) {
      std::vector<Example> batch;
      for (size_t b = start; b < std::min(start + batch_size, order.size());
           ++b)
        batch.push_back(examples[order[b]]);
      LossGrad lg = loss_and_gradient(model, batch, config.lambda, theta0);
      epoch_loss += lg.loss;
      for (size_t i = 0; i < model.weights.size(); ++i)
        model.weights[i] -= config.eta * lg.grad[i];
    }
    g_epoch_losses.push_back(epoch_loss);
  }
  return model;
}

std::vector<std::string> collect_inventory(Task task, const Corpus& corpus) {
  std::set<std::string> items;
  for (const auto& sent : corpus.sentences)
    for (const auto& tok : sent.tokens) {
      if (task == Task::Parsing) {
        if (tok.deprel) items.insert(*tok.deprel);
      } else {
        items.insert(tok.upos);
      }
    }
  return {items.begin(), items.end()};
}

int inventory_index(const std::vector<std::string>& inventory,
                    const std::string& item) {
  auto it = std::find(inventory.begin(), inventory.end(), item);
  if (it == inventory.end())
    throw ModelError("item '" + item + "' not in the model inventory");
  return static_cast<int>(it - inventory.begin());
}

}  // namespace

const std::vector<double>& last_epoch_losses() { return g_epoch_losses; }

ScoringModel train_supervised(Task task, const Corpus& labelled,
                              const TrainConfig& config,
                              const ScoringModel* init) {
  Corpus usable;
  for (const auto& sent : labelled.sentences) {
    if (sent.size() > config.length_cap) continue;
    if (task == Task::Parsing && !sent.labelled())
      throw ModelError("sentence '" + sent.id + "' has no gold tree");
    usable.sentences.push_back(sent);
  }
  if (usable.sentences.empty())
    throw ModelError("no usable sentences after length filtering");

  ScoringModel model =
      init ? *init
           : ScoringModel::make(task, collect_inventory(task, usable));
  if (model.task != task) throw ModelError("init model task mismatch");
  std::vector<double> theta0 = model.weights;

  if (task == Task::Parsing) {
    std::vector<DepExample> examples;
    const int L = static_cast<int>(model.inventory.size());
    for (const auto& sent : usable.sentences) {
      DepChart chart{ArcMask::none(sent.size(), L), {}};
      for (int j = 1; j <= sent.size(); ++j)
        chart.mask.set(*sent.tokens[j - 1].head, j,
                       inventory_index(model.inventory,
                                       *sent.tokens[j - 1].deprel),
                       true);
      examples.push_back({sent, std::move(chart)});
    }
    return run_training(std::move(model), std::move(examples), config, theta0);
  }

  std::vector<ChainExample> examples;
  const int T = static_cast<int>(model.inventory.size());
  for (const auto& sent : usable.sentences) {
    const int n = sent.size();
    ChainChart chart{PairMask::none(n, T), {}};
    if (n == 1) {
      chart.mask.allowed_unary[inventory_index(model.inventory,
                                               sent.tokens[0].upos)] = 1;
    } else {
      for (int j = 1; j <= n - 1; ++j)
        chart.mask.set(j,
                       inventory_index(model.inventory, sent.tokens[j - 1].upos),
                       inventory_index(model.inventory, sent.tokens[j].upos),
                       true);
    }
    examples.push_back({sent, std::move(chart)});
  }
  return run_training(std::move(model), std::move(examples), config, theta0);
}

namespace {

void check_ensemble(const EnsembleSpec& ensemble) {
  if (ensemble.sources.empty()) throw ModelError("empty ensemble");
  for (const auto& src : ensemble.sources)
    if (src.inventory != ensemble.sources[0].inventory ||
        src.task != ensemble.sources[0].task ||
        src.hash_bits != ensemble.sources[0].hash_bits ||
        src.hash_seed != ensemble.sources[0].hash_seed)
      throw ModelError("source models must share task, inventory, and "
                       "hash space");
}

}  // namespace

ScoringModel train_target_with_charts(const EnsembleSpec& ensemble,
                                      const std::vector<DepExample>& examples,
                                      const TrainConfig& config) {
  check_ensemble(ensemble);
  if (examples.empty()) throw ModelError("no training examples");
  ScoringModel model = ensemble.sources[0];
  std::vector<double> theta0 = model.weights;
  return run_training(std::move(model), examples, config, theta0);
}

ScoringModel train_target_with_charts(
    const EnsembleSpec& ensemble, const std::vector<ChainExample>& examples,
    const TrainConfig& config) {
  check_ensemble(ensemble);
  if (examples.empty()) throw ModelError("no training examples");
  ScoringModel model = ensemble.sources[0];
  std::vector<double> theta0 = model.weights;
  return run_training(std::move(model), examples, config, theta0);
}

ScoringModel train_target(const EnsembleSpec& ensemble,
                          const Corpus& unlabelled, ChartMethod method,
                          const TrainConfig& config) {
  check_ensemble(ensemble);

  Corpus usable;
  for (const auto& sent : unlabelled.sentences)
    if (sent.size() <= config.length_cap) usable.sentences.push_back(sent);
  if (usable.sentences.empty())
    throw ModelError("no usable sentences after length filtering");

  ScoringModel model = ensemble.sources[0];
  std::vector<double> theta0 = model.weights;
  const Task task = model.task;

  if (task == Task::Parsing) {
    std::vector<DepExample> examples;
    for (const auto& sent : usable.sentences) {
      DepChart chart;
      switch (method) {
        case ChartMethod::Pptx:
          chart = pptx_dep_chart(ensemble, sent, config.sigma);
          break;
        case ChartMethod::Lop:
          chart = lop_dep_chart(ensemble, sent, config.sigma);
          break;
        case ChartMethod::MvPseudo: {
          DepTree mv = mv_predict_dep(ensemble, sent);
          const int L = static_cast<int>(model.inventory.size());
          chart.mask = ArcMask::none(sent.size(), L);
          for (int j = 1; j <= sent.size(); ++j)
            chart.mask.set(mv.head[j - 1], j, mv.label[j - 1], true);
          break;
        }
      }
      examples.push_back({sent, std::move(chart)});
    }
    return run_training(std::move(model), std::move(examples), config, theta0);
  }

  std::vector<ChainExample> examples;
  for (const auto& sent : usable.sentences) {
    ChainChart chart;
    switch (method) {
      case ChartMethod::Pptx:
        chart = pptx_chain_chart(ensemble, sent, config.sigma);
        break;
      case ChartMethod::Lop:
        chart = lop_chain_chart(ensemble, sent, config.sigma);
        break;
      case ChartMethod::MvPseudo: {
        TagSeq mv = mv_predict_chain(ensemble, sent);
        const int n = sent.size();
        const int T = static_cast<int>(model.inventory.size());
        chart.mask = PairMask::none(n, T);
        if (n == 1) {
          chart.mask.allowed_unary[mv.tag[0]] = 1;
        } else {
          for (int j = 1; j <= n - 1; ++j)
            chart.mask.set(j, mv.tag[j - 1], mv.tag[j], true);
        }
        break;
      }
    }
    examples.push_back({sent, std::move(chart)});
  }
  return run_training(std::move(model), std::move(examples), config, theta0);
}

std::string model_to_json(const ScoringModel& model) {
  nlohmann::json doc;
  doc["task"] = model.task == Task::Parsing ? "parsing" : "tagging";
  doc["templates"] = model.template_names();
  doc["inventory"] = model.inventory;
  doc["hash_bits"] = model.hash_bits;
  doc["hash_seed"] = model.hash_seed;
  nlohmann::json weights = nlohmann::json::array();
  for (size_t i = 0; i < model.weights.size(); ++i)
    if (model.weights[i] != 0.0)
      weights.push_back({i, model.weights[i]});
  doc["weights"] = weights;
  return doc.dump();
}

ScoringModel model_from_json(const std::string& text) {
  nlohmann::json doc = nlohmann::json::parse(text);
  std::string task = doc.at("task").get<std::string>();
  ScoringModel model = ScoringModel::make(
      task == "parsing" ? Task::Parsing : Task::Tagging,
      doc.at("inventory").get<std::vector<std::string>>(),
      doc.at("hash_bits").get<int>(), doc.at("hash_seed").get<uint64_t>());
  for (const auto& entry : doc.at("weights"))
    model.weights.at(entry.at(0).get<size_t>()) = entry.at(1).get<double>();
  return model;
}

}  // namespace xfer

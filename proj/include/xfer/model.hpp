#ifndef XFER_MODEL_HPP
#define XFER_MODEL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "xfer/chart.hpp"
#include "xfer/conllu.hpp"
#include "xfer/crf.hpp"
#include "xfer/dep.hpp"

namespace xfer {

class ModelError : public std::runtime_error {
 public:
  explicit ModelError(const std::string& msg) : std::runtime_error(msg) {}
};

constexpr uint64_t kDefaultHashSeed = 0x9e3779b97f4a7c15ULL;
constexpr int kDefaultHashBits = 20;

// Log-linear scoring model with hashed feature templates. The inventory
// holds dependency labels (parsing) or tags (tagging).
struct ScoringModel {
  Task task = Task::Parsing;
  std::vector<std::string> inventory;
  int hash_bits = kDefaultHashBits;
  uint64_t hash_seed = kDefaultHashSeed;
  std::vector<double> weights;

  static ScoringModel make(Task task, std::vector<std::string> inventory,
                           int hash_bits = kDefaultHashBits,
                           uint64_t hash_seed = kDefaultHashSeed);

  size_t dim() const { return size_t(1) << hash_bits; }
  std::vector<std::string> template_names() const;
};

struct TrainConfig {
  double eta = 9.4e-5;     // parsing default; tagging uses 2.6e-4
  double lambda = 1.6e-4;  // parsing default; tagging uses 4.7e-3
  int epochs = 10;
  int batch_size = 8;
  double sigma = 0.95;
  uint64_t seed = 1;
  int length_cap = 30;  // parsing default; tagging uses 60

  static TrainConfig defaults(Task task);
};

enum class ChartMethod { Pptx, Lop, MvPseudo };

// Feature indices of one substructure, used for scoring and gradients.
using FeatureVec = std::vector<uint32_t>;

ArcScores score_arcs(const ScoringModel& model, const Sentence& sentence);
ChainScores score_chain(const ScoringModel& model, const Sentence& sentence);

// Feature extraction underlying the scores; exposed for the gradient.
FeatureVec arc_features(const ScoringModel& model, const Sentence& sentence,
                        int head, int dep, int label);
FeatureVec emit_features(const ScoringModel& model, const Sentence& sentence,
                         int pos, int tag);
uint32_t trans_feature(const ScoringModel& model, int tag, int tag2);

double chart_log_prob(const ScoringModel& model, const Sentence& sentence,
                      const DepChart& chart);
double chart_log_prob(const ScoringModel& model, const Sentence& sentence,
                      const ChainChart& chart);

struct DepExample {
  Sentence sentence;
  DepChart chart;
};
struct ChainExample {
  Sentence sentence;
  ChainChart chart;
};

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

LossGrad loss_and_gradient(const ScoringModel& model,
                           const std::vector<DepExample>& batch, double lambda,
                           const std::vector<double>& theta0);
LossGrad loss_and_gradient(const ScoringModel& model,
                           const std::vector<ChainExample>& batch,
                           double lambda, const std::vector<double>& theta0);

struct EnsembleSpec {
  std::vector<ScoringModel> sources;
  std::vector<double> alphas;  // simplex; uniform by default

  Task task() const { return sources.at(0).task; }
  static EnsembleSpec uniform(std::vector<ScoringModel> sources);
};

ScoringModel train_supervised(Task task, const Corpus& labelled,
                              const TrainConfig& config,
                              const ScoringModel* init = nullptr);

ScoringModel train_target(const EnsembleSpec& ensemble,
                          const Corpus& unlabelled, ChartMethod method,
                          const TrainConfig& config);

// Target training from precomputed charts (e.g. loaded from a cache).
ScoringModel train_target_with_charts(const EnsembleSpec& ensemble,
                                      const std::vector<DepExample>& examples,
                                      const TrainConfig& config);
ScoringModel train_target_with_charts(
    const EnsembleSpec& ensemble, const std::vector<ChainExample>& examples,
    const TrainConfig& config);

// Per-epoch training losses of the last train_* call on this thread.
const std::vector<double>& last_epoch_losses();

std::string model_to_json(const ScoringModel& model);
ScoringModel model_from_json(const std::string& text);

}  // namespace xfer

#endif

#include "xfer/ensemble.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <map>

namespace xfer {

std::vector<SubstructureDist> source_marginals(const EnsembleSpec& ensemble,
                                               const Sentence& sentence) {
  std::vector<SubstructureDist> out;
  out.reserve(ensemble.sources.size());
  for (const auto& src : ensemble.sources) {
    if (src.task == Task::Parsing)
      out.push_back(arc_marginals(score_arcs(src, sentence)));
    else
      out.push_back(pair_marginals(score_chain(src, sentence)));
  }
  return out;
}

std::vector<DepTree> source_one_bests_dep(const EnsembleSpec& ensemble,
                                          const Sentence& sentence) {
  std::vector<DepTree> out;
  for (const auto& src : ensemble.sources)
    out.push_back(mst_decode(score_arcs(src, sentence)));
  return out;
}

std::vector<TagSeq> source_one_bests_chain(const EnsembleSpec& ensemble,
                                           const Sentence& sentence) {
  std::vector<TagSeq> out;
  for (const auto& src : ensemble.sources)
    out.push_back(viterbi_decode(score_chain(src, sentence)));
  return out;
}

DepChart pptx_dep_chart(const EnsembleSpec& ensemble, const Sentence& sentence,
                        double sigma) {
  const int L = static_cast<int>(ensemble.sources.at(0).inventory.size());
  return build_dep_chart_pptx(source_marginals(ensemble, sentence),
                              source_one_bests_dep(ensemble, sentence),
                              sentence.size(), L, sigma);
}

DepChart lop_dep_chart(const EnsembleSpec& ensemble, const Sentence& sentence,
                       double sigma) {
  const int L = static_cast<int>(ensemble.sources.at(0).inventory.size());
  return build_dep_chart_lop(source_marginals(ensemble, sentence),
                             source_one_bests_dep(ensemble, sentence),
                             sentence.size(), L, sigma, ensemble.alphas);
}

ChainChart pptx_chain_chart(const EnsembleSpec& ensemble,
                            const Sentence& sentence, double sigma) {
  const int T = static_cast<int>(ensemble.sources.at(0).inventory.size());
  return build_chain_chart_pptx(source_marginals(ensemble, sentence),
                                source_one_bests_chain(ensemble, sentence),
                                sentence.size(), T, sigma);
}

ChainChart lop_chain_chart(const EnsembleSpec& ensemble,
                           const Sentence& sentence, double sigma) {
  const int T = static_cast<int>(ensemble.sources.at(0).inventory.size());
  return build_chain_chart_lop(source_marginals(ensemble, sentence),
                               source_one_bests_chain(ensemble, sentence),
                               sentence.size(), T, sigma, ensemble.alphas);
}

DepTree mv_predict_dep(const EnsembleSpec& ensemble, const Sentence& sentence) {
  const int n = sentence.size();
  const int L = static_cast<int>(ensemble.sources.at(0).inventory.size());
  ArcScores votes(n, ensemble.sources.at(0).inventory);
  for (const auto& tree : source_one_bests_dep(ensemble, sentence))
    for (int j = 1; j <= n; ++j)
      votes.at(tree.head[j - 1], j, tree.label[j - 1]) += 1.0;
  (void)L;
  return mst_decode(votes);
}

TagSeq mv_predict_chain(const EnsembleSpec& ensemble,
                        const Sentence& sentence) {
  const int n = sentence.size();
  const auto& tags = ensemble.sources.at(0).inventory;
  auto one_bests = source_one_bests_chain(ensemble, sentence);
  TagSeq out;
  out.tag.resize(n);
  for (int j = 0; j < n; ++j) {
    std::map<int, int> votes;
    for (const auto& seq : one_bests) ++votes[seq.tag[j]];
    int best = -1, best_votes = -1;
    for (const auto& [t, v] : votes) {
      if (v > best_votes ||
          (v == best_votes && tags[t] < tags[best])) {
        best = t;
        best_votes = v;
      }
    }
    out.tag[j] = best;
  }
  return out;
}

std::vector<int> gold_substructure_ids(
    Task task, const Sentence& sentence,
    const std::vector<std::string>& inventory) {
  const int n = sentence.size();
  auto index_of = [&](const std::string& item) {
    auto it = std::find(inventory.begin(), inventory.end(), item);
    if (it == inventory.end())
      throw ModelError("gold item '" + item + "' not in the inventory");
    return static_cast<int>(it - inventory.begin());
  };
  std::vector<int> ids;
  if (task == Task::Parsing) {
    const int L = static_cast<int>(inventory.size());
    for (int j = 1; j <= n; ++j) {
      const auto& tok = sentence.tokens[j - 1];
      if (!tok.head || !tok.deprel)
        throw ModelError("sentence '" + sentence.id + "' is not labelled");
      ids.push_back(*tok.head * L + index_of(*tok.deprel));
    }
  } else {
    const int T = static_cast<int>(inventory.size());
    if (n == 1) {
      ids.push_back(index_of(sentence.tokens[0].upos));
    } else {
      for (int j = 1; j <= n - 1; ++j)
        ids.push_back(index_of(sentence.tokens[j - 1].upos) * T +
                      index_of(sentence.tokens[j].upos));
    }
  }
  return ids;
}

namespace {

struct PoolData {
  // log p_k(c), clamped, per sentence position; gold id per position.
  std::vector<std::vector<std::vector<double>>> logp;  // [pos][k][c]
  std::vector<int> gold;
  size_t total_tokens = 0;
};

PoolData collect_pool_data(const EnsembleSpec& ensemble,
                           const Corpus& labelled) {
  PoolData data;
  const auto& inventory = ensemble.sources.at(0).inventory;
  const Task task = ensemble.task();
  for (const auto& sent : labelled.sentences) {
    auto margs = source_marginals(ensemble, sent);
    auto gold = gold_substructure_ids(task, sent, inventory);
    data.total_tokens += sent.tokens.size();
    for (size_t p = 0; p < gold.size(); ++p) {
      std::vector<std::vector<double>> row;
      for (const auto& dist : margs) {
        std::vector<double> lp(dist.pos[p].size());
        for (size_t c = 0; c < lp.size(); ++c)
          lp[c] = std::log(std::max(dist.pos[p][c], 1e-12));
        row.push_back(std::move(lp));
      }
      data.logp.push_back(std::move(row));
      data.gold.push_back(gold[p]);
    }
  }
  return data;
}

// Objective and gradient with respect to the alphas (before the softmax
// chain rule): F = (1/N) sum_pos -log pooled(gold).
double pool_objective(const PoolData& data, const std::vector<double>& alphas,
                      std::vector<double>* grad_alpha) {
  const size_t K = alphas.size();
  double obj = 0.0;
  if (grad_alpha) grad_alpha->assign(K, 0.0);
  for (size_t p = 0; p < data.logp.size(); ++p) {
    const auto& lp = data.logp[p];
    const size_t m = lp[0].size();
    std::vector<double> pooled_logit(m, 0.0);
    for (size_t k = 0; k < K; ++k)
      for (size_t c = 0; c < m; ++c) pooled_logit[c] += alphas[k] * lp[k][c];
    double mx = *std::max_element(pooled_logit.begin(), pooled_logit.end());
    double z = 0.0;
    for (double v : pooled_logit) z += std::exp(v - mx);
    double logz = mx + std::log(z);
    int g = data.gold[p];
    obj += logz - pooled_logit[g];
    if (grad_alpha) {
      for (size_t k = 0; k < K; ++k) {
        double expect = 0.0;
        for (size_t c = 0; c < m; ++c)
          expect += std::exp(pooled_logit[c] - logz) * lp[k][c];
        (*grad_alpha)[k] += expect - lp[k][g];
      }
    }
  }
  double scale = 1.0 / double(std::max<size_t>(data.total_tokens, 1));
  obj *= scale;
  if (grad_alpha)
    for (double& g : *grad_alpha) g *= scale;
  return obj;
}

std::vector<double> softmax(const std::vector<double>& z) {
  double mx = *std::max_element(z.begin(), z.end());
  std::vector<double> out(z.size());
  double sum = 0.0;
  for (size_t i = 0; i < z.size(); ++i) sum += out[i] = std::exp(z[i] - mx);
  for (double& v : out) v /= sum;
  return out;
}

}  // namespace

std::vector<double> learn_alphas(const EnsembleSpec& ensemble,
                                 const Corpus& labelled) {
  if (labelled.sentences.empty())
    throw ModelError("learn_alphas requires labelled sentences");
  if (ensemble.sources.size() < 2)
    throw ModelError("learn_alphas requires at least two sources");
  PoolData data = collect_pool_data(ensemble, labelled);

  const size_t K = ensemble.sources.size();
  std::vector<double> logits(K, 0.0);  // uniform init
  std::vector<double> alphas = softmax(logits);
  std::vector<double> grad_alpha;
  double prev = pool_objective(data, alphas, &grad_alpha);
  double lr = 0.1;
  for (int epoch = 0; epoch < 100; ++epoch) {
    // Chain rule through the softmax.
    double dot = 0.0;
    for (size_t k = 0; k < K; ++k) dot += grad_alpha[k] * alphas[k];
    std::vector<double> step(K);
    for (size_t k = 0; k < K; ++k)
      step[k] = alphas[k] * (grad_alpha[k] - dot);

    std::vector<double> new_logits = logits;
    for (size_t k = 0; k < K; ++k) new_logits[k] -= lr * step[k];
    std::vector<double> new_alphas = softmax(new_logits);
    std::vector<double> new_grad;
    double cur = pool_objective(data, new_alphas, &new_grad);
    if (cur <= prev) {
      logits = std::move(new_logits);
      alphas = std::move(new_alphas);
      grad_alpha = std::move(new_grad);
      if (std::abs(prev - cur) <
          1e-6 * std::max(std::abs(prev), 1e-12)) {
        prev = cur;
        break;
      }
      prev = cur;
    }
    lr *= 0.9;
  }
  return alphas;
}

double pool_kl(const EnsembleSpec& ensemble, const std::vector<double>& alphas,
               const Corpus& labelled) {
  PoolData data = collect_pool_data(ensemble, labelled);
  return pool_objective(data, alphas, nullptr);
}

std::string alphas_to_json(const std::vector<double>& alphas) {
  nlohmann::json doc;
  doc["alphas"] = alphas;
  return doc.dump();
}

std::vector<double> alphas_from_json(const std::string& text) {
  return nlohmann::json::parse(text).at("alphas").get<std::vector<double>>();
}

}  // namespace xfer

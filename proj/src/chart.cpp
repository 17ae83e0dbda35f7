#include "xfer/chart.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace xfer {

using nlohmann::json;

std::vector<int> threshold_select(const std::vector<double>& probs,
                                  double sigma) {
  std::vector<int> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (probs[a] != probs[b]) return probs[a] > probs[b];
    return a < b;
  });
  std::vector<int> selected;
  double cum = 0.0;
  for (int id : order) {
    selected.push_back(id);
    cum += probs[id];
    if (cum >= sigma) break;
  }
  std::sort(selected.begin(), selected.end());
  return selected;
}

SubstructureDist lop_pool(const std::vector<SubstructureDist>& dists,
                          const std::vector<double>& alphas) {
  if (dists.empty() || dists.size() != alphas.size())
    throw InferenceError("lop_pool: need K >= 1 distributions with matching "
                         "alphas");
  const size_t K = dists.size();
  SubstructureDist pooled;
  pooled.pos.resize(dists[0].pos.size());
  for (size_t j = 0; j < pooled.pos.size(); ++j) {
    const size_t m = dists[0].pos[j].size();
    std::vector<double> logp(m, 0.0);
    for (size_t k = 0; k < K; ++k) {
      if (dists[k].pos[j].size() != m)
        throw InferenceError("lop_pool: distributions on different supports");
      for (size_t c = 0; c < m; ++c)
        logp[c] += alphas[k] * std::log(std::max(dists[k].pos[j][c], 1e-12));
    }
    double mx = *std::max_element(logp.begin(), logp.end());
    double z = 0.0;
    for (double v : logp) z += std::exp(v - mx);
    pooled.pos[j].resize(m);
    for (size_t c = 0; c < m; ++c)
      pooled.pos[j][c] = std::exp(logp[c] - mx) / z;
  }
  return pooled;
}

namespace {

template <typename Structure, typename Chart>
void add_extras(Chart& chart, const std::vector<Structure>& one_bests) {
  for (const auto& s : one_bests) {
    bool covered;
    if constexpr (std::is_same_v<Structure, DepTree>)
      covered = tree_in_mask(chart.mask, s);
    else
      covered = sequence_in_mask(chart.mask, s);
    if (covered) continue;
    if (std::find(chart.extras.begin(), chart.extras.end(), s) ==
        chart.extras.end())
      chart.extras.push_back(s);
  }
}

void apply_dep_selection(ArcMask& mask, int j, const std::vector<int>& ids,
                         int num_labels) {
  for (int id : ids) {
    int i = id / num_labels;
    int l = id % num_labels;
    if (i == j) continue;  // impossible slot, probability 0
    mask.set(i, j, l, true);
  }
}

void apply_chain_selection(PairMask& mask, int j, const std::vector<int>& ids,
                           int num_tags, int n) {
  if (n == 1) {
    for (int id : ids) mask.allowed_unary[id] = 1;
    return;
  }
  for (int id : ids) mask.set(j, id / num_tags, id % num_tags, true);
}

}  // namespace

DepChart build_dep_chart_pptx(const std::vector<SubstructureDist>& marginals,
                              const std::vector<DepTree>& one_bests, int n,
                              int num_labels, double sigma) {
  DepChart chart{ArcMask::none(n, num_labels), {}};
  for (const auto& dist : marginals)
    for (int j = 1; j <= n; ++j)
      apply_dep_selection(chart.mask, j,
                          threshold_select(dist.pos[j - 1], sigma), num_labels);
  add_extras(chart, one_bests);
  return chart;
}

DepChart build_dep_chart_lop(const std::vector<SubstructureDist>& marginals,
                             const std::vector<DepTree>& one_bests, int n,
                             int num_labels, double sigma,
                             const std::vector<double>& alphas) {
  SubstructureDist pooled = lop_pool(marginals, alphas);
  DepChart chart{ArcMask::none(n, num_labels), {}};
  for (int j = 1; j <= n; ++j)
    apply_dep_selection(chart.mask, j,
                        threshold_select(pooled.pos[j - 1], sigma), num_labels);
  add_extras(chart, one_bests);
  return chart;
}

ChainChart build_chain_chart_pptx(
    const std::vector<SubstructureDist>& marginals,
    const std::vector<TagSeq>& one_bests, int n, int num_tags, double sigma) {
  ChainChart chart{PairMask::none(n, num_tags), {}};
  for (const auto& dist : marginals)
    for (size_t j = 1; j <= dist.pos.size(); ++j)
      apply_chain_selection(chart.mask, static_cast<int>(j),
                            threshold_select(dist.pos[j - 1], sigma), num_tags,
                            n);
  add_extras(chart, one_bests);
  return chart;
}

ChainChart build_chain_chart_lop(const std::vector<SubstructureDist>& marginals,
                                 const std::vector<TagSeq>& one_bests, int n,
                                 int num_tags, double sigma,
                                 const std::vector<double>& alphas) {
  SubstructureDist pooled = lop_pool(marginals, alphas);
  ChainChart chart{PairMask::none(n, num_tags), {}};
  for (size_t j = 1; j <= pooled.pos.size(); ++j)
    apply_chain_selection(chart.mask, static_cast<int>(j),
                          threshold_select(pooled.pos[j - 1], sigma), num_tags,
                          n);
  add_extras(chart, one_bests);
  return chart;
}

bool chart_contains(const DepChart& chart, const DepTree& tree) {
  if (tree_in_mask(chart.mask, tree)) return true;
  return std::find(chart.extras.begin(), chart.extras.end(), tree) !=
         chart.extras.end();
}

bool chart_contains(const ChainChart& chart, const TagSeq& seq) {
  if (sequence_in_mask(chart.mask, seq)) return true;
  return std::find(chart.extras.begin(), chart.extras.end(), seq) !=
         chart.extras.end();
}

std::string dep_chart_to_json(const DepChart& chart,
                              const std::vector<std::string>& labels) {
  json doc;
  doc["task"] = "parsing";
  doc["n"] = chart.mask.n;
  doc["labels"] = labels;
  json allowed = json::array();
  const int L = chart.mask.num_labels;
  for (int j = 1; j <= chart.mask.n; ++j) {
    json ids = json::array();
    for (int i = 0; i <= chart.mask.n; ++i) {
      if (i == j) continue;
      for (int l = 0; l < L; ++l)
        if (chart.mask.get(i, j, l)) ids.push_back(i * L + l);
    }
    allowed.push_back(ids);
  }
  doc["allowed"] = allowed;
  json extras = json::array();
  for (const auto& t : chart.extras)
    extras.push_back({{"heads", t.head}, {"labels", t.label}});
  doc["extras"] = extras;
  return doc.dump();
}

std::string chain_chart_to_json(const ChainChart& chart,
                                const std::vector<std::string>& tags) {
  json doc;
  doc["task"] = "tagging";
  doc["n"] = chart.mask.n;
  doc["tags"] = tags;
  json allowed = json::array();
  const int T = chart.mask.num_tags;
  if (chart.mask.n == 1) {
    json ids = json::array();
    for (int t = 0; t < T; ++t)
      if (chart.mask.allowed_unary[t]) ids.push_back(t);
    allowed.push_back(ids);
  } else {
    for (int j = 1; j <= chart.mask.n - 1; ++j) {
      json ids = json::array();
      for (int t = 0; t < T; ++t)
        for (int t2 = 0; t2 < T; ++t2)
          if (chart.mask.get(j, t, t2)) ids.push_back(t * T + t2);
      allowed.push_back(ids);
    }
  }
  doc["allowed"] = allowed;
  json extras = json::array();
  for (const auto& s : chart.extras) extras.push_back({{"tags", s.tag}});
  doc["extras"] = extras;
  return doc.dump();
}

DepChart dep_chart_from_json(const std::string& text) {
  json doc = json::parse(text);
  int n = doc.at("n").get<int>();
  int L = static_cast<int>(doc.at("labels").size());
  DepChart chart{ArcMask::none(n, L), {}};
  const auto& allowed = doc.at("allowed");
  for (int j = 1; j <= n; ++j)
    for (int id : allowed.at(j - 1).get<std::vector<int>>())
      chart.mask.set(id / L, j, id % L, true);
  for (const auto& e : doc.at("extras"))
    chart.extras.push_back(DepTree{e.at("heads").get<std::vector<int>>(),
                                   e.at("labels").get<std::vector<int>>()});
  return chart;
}

ChainChart chain_chart_from_json(const std::string& text) {
  json doc = json::parse(text);
  int n = doc.at("n").get<int>();
  int T = static_cast<int>(doc.at("tags").size());
  ChainChart chart{PairMask::none(n, T), {}};
  const auto& allowed = doc.at("allowed");
  if (n == 1) {
    for (int id : allowed.at(0).get<std::vector<int>>())
      chart.mask.allowed_unary[id] = 1;
  } else {
    for (int j = 1; j <= n - 1; ++j)
      for (int id : allowed.at(j - 1).get<std::vector<int>>())
        chart.mask.set(j, id / T, id % T, true);
  }
  for (const auto& e : doc.at("extras"))
    chart.extras.push_back(TagSeq{e.at("tags").get<std::vector<int>>()});
  return chart;
}

}  // namespace xfer

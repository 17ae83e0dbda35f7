#include "xfer/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

namespace xfer {

ChartStats chart_size(const DepChart& chart) {
  ChartStats s;
  s.size_masked = count_trees(chart.mask);
  s.size_total = s.size_masked + double(chart.extras.size());
  return s;
}

ChartStats chart_size(const ChainChart& chart) {
  ChartStats s;
  s.size_masked = count_sequences(chart.mask);
  s.size_total = s.size_masked + double(chart.extras.size());
  return s;
}

std::vector<DepTree> chart_members(const DepChart& chart, double cap) {
  double induced = count_trees(chart.mask) + double(chart.extras.size());
  if (induced > cap)
    throw MetricsError("chart enumeration cap exceeded (" +
                       std::to_string(induced) + " structures)");
  const int n = chart.mask.n;
  const int L = chart.mask.num_labels;
  std::vector<DepTree> out;
  DepTree cur;
  cur.head.assign(n, -1);
  cur.label.assign(n, -1);

  // Assign dependents left to right; prune cycles among assigned heads.
  auto creates_cycle = [&](int j, int h) {
    int cur_node = h;
    int steps = 0;
    while (cur_node != 0 && cur_node != -1) {
      if (cur_node == j) return true;
      cur_node = cur_node <= int(cur.head.size()) && cur.head[cur_node - 1] > -1
                     ? cur.head[cur_node - 1]
                     : -1;
      if (++steps > n) return true;
    }
    return false;
  };

  int roots = 0;
  std::function<void(int)> rec = [&](int j) {
    if (j > n) {
      if (roots == 1) out.push_back(cur);
      return;
    }
    for (int i = 0; i <= n; ++i) {
      if (i == j) continue;
      bool any_label = false;
      for (int l = 0; l < L; ++l)
        if (chart.mask.get(i, j, l)) {
          any_label = true;
          break;
        }
      if (!any_label) continue;
      if (i == 0 && roots == 1) continue;
      if (i != 0 && creates_cycle(j, i)) continue;
      cur.head[j - 1] = i;
      if (i == 0) ++roots;
      for (int l = 0; l < L; ++l) {
        if (!chart.mask.get(i, j, l)) continue;
        cur.label[j - 1] = l;
        rec(j + 1);
      }
      if (i == 0) --roots;
      cur.head[j - 1] = -1;
      cur.label[j - 1] = -1;
    }
  };
  rec(1);
  for (const auto& t : chart.extras) out.push_back(t);
  return out;
}

std::vector<TagSeq> chart_members(const ChainChart& chart, double cap) {
  double induced =
      count_sequences(chart.mask) + double(chart.extras.size());
  if (induced > cap)
    throw MetricsError("chart enumeration cap exceeded (" +
                       std::to_string(induced) + " structures)");
  const int n = chart.mask.n;
  const int T = chart.mask.num_tags;
  std::vector<TagSeq> out;
  TagSeq cur;
  cur.tag.assign(n, -1);
  std::function<void(int)> rec = [&](int j) {
    if (j > n) {
      out.push_back(cur);
      return;
    }
    for (int t = 0; t < T; ++t) {
      if (n == 1 && !chart.mask.allowed_unary[t]) continue;
      if (j > 1 && !chart.mask.get(j - 1, cur.tag[j - 2], t)) continue;
      cur.tag[j - 1] = t;
      rec(j + 1);
      cur.tag[j - 1] = -1;
    }
  };
  rec(1);
  for (const auto& s : chart.extras) out.push_back(s);
  return out;
}

namespace {

// Substructure set of a structure, as comparable ids.
std::vector<long long> arc_set(const DepTree& t) {
  std::vector<long long> out;
  for (int j = 1; j <= t.size(); ++j)
    out.push_back((static_cast<long long>(t.head[j - 1]) << 40) | (static_cast<long long>(j) << 20) |
                  t.label[j - 1]);
  return out;
}

std::vector<long long> pair_set(const TagSeq& s) {
  std::vector<long long> out;
  if (s.size() == 1) {
    out.push_back(s.tag[0]);
    return out;
  }
  for (int j = 1; j < s.size(); ++j)
    out.push_back((static_cast<long long>(j) << 40) | (static_cast<long long>(s.tag[j - 1]) << 20) |
                  s.tag[j]);
  return out;
}

template <typename Structure, typename SetFn>
PrCounts pr_from_members(const std::vector<Structure>& members,
                         const Structure& gold, SetFn set_of) {
  PrCounts pr;
  auto gold_set = set_of(gold);
  std::set<long long> gold_ids(gold_set.begin(), gold_set.end());
  std::set<long long> seen;
  for (const auto& m : members) {
    auto ids = set_of(m);
    pr.precision_den += double(ids.size());
    for (long long id : ids) {
      if (gold_ids.count(id)) pr.precision_num += 1.0;
      seen.insert(id);
    }
  }
  pr.recall_den = double(gold_set.size());
  for (long long id : gold_set)
    if (seen.count(id)) pr.recall_num += 1.0;
  return pr;
}

}  // namespace

PrCounts chart_pr(const DepChart& chart, const DepTree& gold, double cap) {
  return pr_from_members(chart_members(chart, cap), gold, arc_set);
}

PrCounts chart_pr(const ChainChart& chart, const TagSeq& gold, double cap) {
  return pr_from_members(chart_members(chart, cap), gold, pair_set);
}

double chart_precision(const std::vector<PrCounts>& counts) {
  double num = 0.0, den = 0.0;
  for (const auto& c : counts) {
    num += c.precision_num;
    den += c.precision_den;
  }
  return den > 0.0 ? num / den : 0.0;
}

double chart_recall(const std::vector<PrCounts>& counts) {
  double num = 0.0, den = 0.0;
  for (const auto& c : counts) {
    num += c.recall_num;
    den += c.recall_den;
  }
  return den > 0.0 ? num / den : 0.0;
}

EvalReport evaluate(const Corpus& pred, const Corpus& gold, Task task) {
  if (pred.sentences.size() != gold.sentences.size())
    throw MetricsError("pred/gold corpora have different sentence counts");
  EvalReport report;
  report.metric = task == Task::Parsing ? "LAS" : "UPOS accuracy";
  for (size_t s = 0; s < pred.sentences.size(); ++s) {
    const auto& ps = pred.sentences[s];
    const auto& gs = gold.sentences[s];
    if (ps.size() != gs.size())
      throw MetricsError("sentence '" + gs.id + "' length mismatch");
    for (int j = 0; j < gs.size(); ++j) {
      const auto& pt = ps.tokens[j];
      const auto& gt = gs.tokens[j];
      if (task == Task::Parsing) {
        if (gt.upos == "PUNCT") continue;
        if (!gt.head || !gt.deprel)
          throw MetricsError("sentence '" + gs.id + "' is not fully labelled");
        ++report.total;
        if (pt.head && pt.deprel && *pt.head == *gt.head &&
            *pt.deprel == *gt.deprel)
          ++report.correct;
      } else {
        ++report.total;
        if (pt.upos == gt.upos) ++report.correct;
      }
    }
  }
  report.accuracy =
      report.total > 0 ? double(report.correct) / double(report.total) : 0.0;
  return report;
}

}  // namespace xfer

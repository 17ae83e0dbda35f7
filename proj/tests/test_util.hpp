#ifndef XFER_TEST_UTIL_HPP
#define XFER_TEST_UTIL_HPP

// Brute-force oracles shared by the test suites. These stay on the
// enumeration path so they are independent of the closed-form
// implementations they check.

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "xfer/crf.hpp"
#include "xfer/dep.hpp"

namespace xfer::test {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

inline double brute_dep_log_partition(const ArcScores& scores,
                                      const ArcMask& mask) {
  double z = kNegInf;
  for (const auto& tree : enumerate_trees(scores.n, scores.num_labels()))
    if (tree_in_mask(mask, tree)) z = log_add(z, tree_score(scores, tree));
  return z;
}

inline SubstructureDist brute_arc_marginals(const ArcScores& scores,
                                            const ArcMask& mask) {
  const int n = scores.n, L = scores.num_labels();
  double z = brute_dep_log_partition(scores, mask);
  SubstructureDist dist;
  dist.pos.assign(n, std::vector<double>((n + 1) * L, 0.0));
  for (const auto& tree : enumerate_trees(n, L)) {
    if (!tree_in_mask(mask, tree)) continue;
    double p = std::exp(tree_score(scores, tree) - z);
    for (int j = 1; j <= n; ++j)
      dist.pos[j - 1][tree.head[j - 1] * L + tree.label[j - 1]] += p;
  }
  return dist;
}

inline double brute_best_tree_score(const ArcScores& scores) {
  double best = kNegInf;
  for (const auto& tree : enumerate_trees(scores.n, scores.num_labels()))
    best = std::max(best, tree_score(scores, tree));
  return best;
}

inline double brute_chain_log_partition(const ChainScores& scores,
                                        const PairMask& mask) {
  double z = kNegInf;
  for (const auto& seq : enumerate_sequences(scores.n, scores.num_tags()))
    if (sequence_in_mask(mask, seq))
      z = log_add(z, sequence_score(scores, seq));
  return z;
}

inline SubstructureDist brute_pair_marginals(const ChainScores& scores,
                                             const PairMask& mask) {
  const int n = scores.n, T = scores.num_tags();
  double z = brute_chain_log_partition(scores, mask);
  SubstructureDist dist;
  if (n == 1) {
    dist.pos.assign(1, std::vector<double>(T, 0.0));
  } else {
    dist.pos.assign(n - 1, std::vector<double>(T * T, 0.0));
  }
  for (const auto& seq : enumerate_sequences(n, T)) {
    if (!sequence_in_mask(mask, seq)) continue;
    double p = std::exp(sequence_score(scores, seq) - z);
    if (n == 1) {
      dist.pos[0][seq.tag[0]] += p;
    } else {
      for (int j = 1; j <= n - 1; ++j)
        dist.pos[j - 1][seq.tag[j - 1] * T + seq.tag[j]] += p;
    }
  }
  return dist;
}

inline double brute_best_sequence_score(const ChainScores& scores) {
  double best = kNegInf;
  for (const auto& seq : enumerate_sequences(scores.n, scores.num_tags()))
    best = std::max(best, sequence_score(scores, seq));
  return best;
}

inline ArcScores random_arc_scores(int n, int num_labels,
                                   std::mt19937_64& rng, double lo = -2.0,
                                   double hi = 2.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  ArcScores scores(n, [&] {
    std::vector<std::string> labels;
    for (int l = 0; l < num_labels; ++l)
      labels.push_back("l" + std::to_string(l));
    return labels;
  }());
  for (double& s : scores.score) s = dist(rng);
  return scores;
}

inline ChainScores random_chain_scores(int n, int num_tags,
                                       std::mt19937_64& rng, double lo = -2.0,
                                       double hi = 2.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  ChainScores scores(n, [&] {
    std::vector<std::string> tags;
    for (int t = 0; t < num_tags; ++t) tags.push_back("t" + std::to_string(t));
    return tags;
  }());
  for (double& s : scores.emit) s = dist(rng);
  for (double& s : scores.trans) s = dist(rng);
  return scores;
}

}  // namespace xfer::test

#endif

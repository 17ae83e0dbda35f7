#include "xfer/crf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace xfer {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

// alpha[j-1][t] = log sum over prefixes ending at position j with tag t.
std::vector<std::vector<double>> forward(const ChainScores& s,
                                         const PairMask& mask) {
  const int n = s.n, T = s.num_tags();
  std::vector<std::vector<double>> alpha(n, std::vector<double>(T, kNegInf));
  for (int t = 0; t < T; ++t) {
    if (n == 1 && !mask.allowed_unary[t]) continue;
    alpha[0][t] = s.emit_at(1, t);
  }
  for (int j = 2; j <= n; ++j)
    for (int t2 = 0; t2 < T; ++t2) {
      double acc = kNegInf;
      for (int t = 0; t < T; ++t) {
        if (!mask.get(j - 1, t, t2)) continue;
        acc = log_add(acc, alpha[j - 2][t] + s.trans_at(t, t2));
      }
      alpha[j - 1][t2] = acc == kNegInf ? kNegInf : acc + s.emit_at(j, t2);
    }
  return alpha;
}

// beta[j-1][t] = log sum over suffixes starting after position j given tag t.
std::vector<std::vector<double>> backward(const ChainScores& s,
                                          const PairMask& mask) {
  const int n = s.n, T = s.num_tags();
  std::vector<std::vector<double>> beta(n, std::vector<double>(T, 0.0));
  for (int j = n - 1; j >= 1; --j)
    for (int t = 0; t < T; ++t) {
      double acc = kNegInf;
      for (int t2 = 0; t2 < T; ++t2) {
        if (!mask.get(j, t, t2)) continue;
        acc = log_add(acc, s.trans_at(t, t2) + s.emit_at(j + 1, t2) +
                               beta[j][t2]);
      }
      beta[j - 1][t] = acc;
    }
  return beta;
}

}  // namespace

double sequence_score(const ChainScores& scores, const TagSeq& seq) {
  double s = 0.0;
  for (int j = 1; j <= seq.size(); ++j) {
    s += scores.emit_at(j, seq.tag[j - 1]);
    if (j > 1) s += scores.trans_at(seq.tag[j - 2], seq.tag[j - 1]);
  }
  return s;
}

bool sequence_in_mask(const PairMask& mask, const TagSeq& seq) {
  if (seq.size() == 1) return mask.allowed_unary[seq.tag[0]] != 0;
  for (int j = 1; j < seq.size(); ++j)
    if (!mask.get(j, seq.tag[j - 1], seq.tag[j])) return false;
  return true;
}

double chain_log_partition(const ChainScores& scores, const PairMask& mask) {
  if (scores.n < 1) throw InferenceError("empty sentence");
  auto alpha = forward(scores, mask);
  double z = kNegInf;
  for (double v : alpha[scores.n - 1]) z = log_add(z, v);
  return z;
}

double chain_log_partition(const ChainScores& scores) {
  return chain_log_partition(scores,
                             PairMask::full(scores.n, scores.num_tags()));
}

SubstructureDist pair_marginals(const ChainScores& scores,
                                const PairMask& mask) {
  const int n = scores.n, T = scores.num_tags();
  double z = chain_log_partition(scores, mask);
  if (z == kNegInf)
    throw InferenceError("mask admits no tag sequence");
  SubstructureDist dist;
  if (n == 1) {
    dist.pos.assign(1, std::vector<double>(T, 0.0));
    for (int t = 0; t < T; ++t)
      if (mask.allowed_unary[t])
        dist.pos[0][t] = std::exp(scores.emit_at(1, t) - z);
    return dist;
  }
  auto alpha = forward(scores, mask);
  auto beta = backward(scores, mask);
  dist.pos.assign(n - 1, std::vector<double>(T * T, 0.0));
  for (int j = 1; j <= n - 1; ++j)
    for (int t = 0; t < T; ++t)
      for (int t2 = 0; t2 < T; ++t2) {
        if (!mask.get(j, t, t2)) continue;
        double lp = alpha[j - 1][t] + scores.trans_at(t, t2) +
                    scores.emit_at(j + 1, t2) + beta[j][t2] - z;
        dist.pos[j - 1][t * T + t2] = lp == kNegInf ? 0.0 : std::exp(lp);
      }
  return dist;
}

SubstructureDist pair_marginals(const ChainScores& scores) {
  return pair_marginals(scores, PairMask::full(scores.n, scores.num_tags()));
}

std::vector<std::vector<double>> unary_marginals(const ChainScores& scores,
                                                 const PairMask& mask) {
  const int n = scores.n, T = scores.num_tags();
  double z = chain_log_partition(scores, mask);
  if (z == kNegInf)
    throw InferenceError("mask admits no tag sequence");
  auto alpha = forward(scores, mask);
  auto beta = backward(scores, mask);
  std::vector<std::vector<double>> out(n, std::vector<double>(T, 0.0));
  for (int j = 1; j <= n; ++j)
    for (int t = 0; t < T; ++t) {
      double lp = alpha[j - 1][t] + beta[j - 1][t] - z;
      out[j - 1][t] = lp == kNegInf ? 0.0 : std::exp(lp);
    }
  return out;
}

double count_sequences(const PairMask& mask) {
  const int n = mask.n, T = mask.num_tags;
  if (n < 1) return 0.0;
  std::vector<double> cur(T, 0.0);
  for (int t = 0; t < T; ++t)
    cur[t] = (n == 1 && !mask.allowed_unary[t]) ? 0.0 : 1.0;
  for (int j = 1; j <= n - 1; ++j) {
    std::vector<double> next(T, 0.0);
    for (int t = 0; t < T; ++t)
      for (int t2 = 0; t2 < T; ++t2)
        if (mask.get(j, t, t2)) next[t2] += cur[t];
    cur = std::move(next);
  }
  double total = 0.0;
  for (double v : cur) total += v;
  return total;
}

TagSeq viterbi_decode(const ChainScores& scores) {
  const int n = scores.n, T = scores.num_tags();
  if (n < 1) throw InferenceError("empty sentence");
  // Best suffix scores; the greedy pass then picks the smallest tag index
  // achieving the optimum, giving the lexicographically smallest argmax.
  std::vector<std::vector<double>> suffix(n, std::vector<double>(T, 0.0));
  for (int j = n - 1; j >= 1; --j)
    for (int t = 0; t < T; ++t) {
      double best = kNegInf;
      for (int t2 = 0; t2 < T; ++t2)
        best = std::max(best, scores.trans_at(t, t2) +
                                  scores.emit_at(j + 1, t2) + suffix[j][t2]);
      suffix[j - 1][t] = best;
    }

  TagSeq seq;
  seq.tag.resize(n);
  int arg = 0;
  double best = kNegInf;
  for (int t = 0; t < T; ++t) {
    double v = scores.emit_at(1, t) + suffix[0][t];
    if (v > best) {
      best = v;
      arg = t;
    }
  }
  seq.tag[0] = arg;
  for (int j = 2; j <= n; ++j) {
    int prev = seq.tag[j - 2];
    best = kNegInf;
    arg = 0;
    for (int t = 0; t < T; ++t) {
      double v = scores.trans_at(prev, t) + scores.emit_at(j, t) +
                 suffix[j - 1][t];
      if (v > best) {
        best = v;
        arg = t;
      }
    }
    seq.tag[j - 1] = arg;
  }
  return seq;
}

std::vector<TagSeq> enumerate_sequences(int n, int num_tags) {
  if (n < 1) throw InferenceError("empty sentence");
  double total = std::pow(double(num_tags), double(n));
  if (total > 100000.0)
    throw InferenceError("enumerate_sequences: T^n exceeds 100000");
  std::vector<TagSeq> out;
  out.reserve(static_cast<size_t>(total));
  TagSeq seq;
  seq.tag.assign(n, 0);
  while (true) {
    out.push_back(seq);
    int k = n - 1;
    while (k >= 0 && seq.tag[k] == num_tags - 1) seq.tag[k--] = 0;
    if (k < 0) break;
    ++seq.tag[k];
  }
  return out;
}

}  // namespace xfer

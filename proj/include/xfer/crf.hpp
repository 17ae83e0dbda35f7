#ifndef XFER_CRF_HPP
#define XFER_CRF_HPP

#include <string>
#include <vector>

#include "xfer/dep.hpp"  // InferenceError
#include "xfer/substructure.hpp"

namespace xfer {

// Linear-chain log-potentials: emissions per position and a
// position-independent transition table.
struct ChainScores {
  int n = 0;
  std::vector<std::string> tags;
  std::vector<double> emit;   // n * T, (j-1) * T + t
  std::vector<double> trans;  // T * T, t * T + t'

  ChainScores() = default;
  ChainScores(int n_, std::vector<std::string> tags_)
      : n(n_), tags(std::move(tags_)),
        emit(static_cast<size_t>(n) * tags.size(), 0.0),
        trans(tags.size() * tags.size(), 0.0) {}

  int num_tags() const { return static_cast<int>(tags.size()); }
  double& emit_at(int j, int t) { return emit[(j - 1) * tags.size() + t]; }
  double emit_at(int j, int t) const { return emit[(j - 1) * tags.size() + t]; }
  double& trans_at(int t, int t2) { return trans[t * tags.size() + t2]; }
  double trans_at(int t, int t2) const { return trans[t * tags.size() + t2]; }
};

// allowed(j, t, t') for pair positions j in 1..n-1; length-1 sentences use
// the unary mask instead.
struct PairMask {
  int n = 0;
  int num_tags = 0;
  std::vector<char> allowed;        // (n-1) * T * T
  std::vector<char> allowed_unary;  // T, used when n == 1

  static PairMask full(int n, int num_tags) {
    PairMask m;
    m.n = n;
    m.num_tags = num_tags;
    m.allowed.assign(static_cast<size_t>(std::max(n - 1, 0)) * num_tags *
                         num_tags,
                     1);
    m.allowed_unary.assign(num_tags, 1);
    return m;
  }
  static PairMask none(int n, int num_tags) {
    PairMask m = full(n, num_tags);
    std::fill(m.allowed.begin(), m.allowed.end(), 0);
    std::fill(m.allowed_unary.begin(), m.allowed_unary.end(), 0);
    return m;
  }

  size_t idx(int j, int t, int t2) const {
    return (static_cast<size_t>(j - 1) * num_tags + t) * num_tags + t2;
  }
  bool get(int j, int t, int t2) const { return allowed[idx(j, t, t2)] != 0; }
  void set(int j, int t, int t2, bool v) { allowed[idx(j, t, t2)] = v ? 1 : 0; }

  bool operator==(const PairMask&) const = default;
};

struct TagSeq {
  std::vector<int> tag;  // tag[j-1] for position j

  int size() const { return static_cast<int>(tag.size()); }
  bool operator==(const TagSeq&) const = default;
  bool operator<(const TagSeq& o) const { return tag < o.tag; }
};

double sequence_score(const ChainScores& scores, const TagSeq& seq);
bool sequence_in_mask(const PairMask& mask, const TagSeq& seq);

double chain_log_partition(const ChainScores& scores, const PairMask& mask);
double chain_log_partition(const ChainScores& scores);

// Pairwise marginals (unary for n == 1), full or mask-restricted. The
// masked variant throws InferenceError when the mask admits no sequence.
SubstructureDist pair_marginals(const ChainScores& scores);
SubstructureDist pair_marginals(const ChainScores& scores,
                                const PairMask& mask);

// Unary tag marginals p(y_j = t), same restrictions as pair_marginals.
std::vector<std::vector<double>> unary_marginals(const ChainScores& scores,
                                                 const PairMask& mask);

double count_sequences(const PairMask& mask);

TagSeq viterbi_decode(const ChainScores& scores);

// All tag sequences in lexicographic (tag index) order; T^n <= 100000.
std::vector<TagSeq> enumerate_sequences(int n, int num_tags);

}  // namespace xfer

#endif

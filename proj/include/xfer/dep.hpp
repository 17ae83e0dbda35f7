#ifndef XFER_DEP_HPP
#define XFER_DEP_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "xfer/substructure.hpp"

namespace xfer {

class InferenceError : public std::runtime_error {
 public:
  explicit InferenceError(const std::string& msg) : std::runtime_error(msg) {}
};

// Arc log-potentials for a sentence of length n. score(i, j, l) is defined
// for head i in 0..n, dependent j in 1..n, i != j, label l in 0..L-1.
struct ArcScores {
  int n = 0;
  std::vector<std::string> labels;
  std::vector<double> score;  // (n+1) * n * L, invalid slots ignored

  ArcScores() = default;
  ArcScores(int n_, std::vector<std::string> labels_)
      : n(n_), labels(std::move(labels_)),
        score(static_cast<size_t>(n + 1) * n * labels.size(), 0.0) {}

  int num_labels() const { return static_cast<int>(labels.size()); }
  size_t idx(int i, int j, int l) const {
    return (static_cast<size_t>(i) * n + (j - 1)) * labels.size() + l;
  }
  double& at(int i, int j, int l) { return score[idx(i, j, l)]; }
  double at(int i, int j, int l) const { return score[idx(i, j, l)]; }
};

struct ArcMask {
  int n = 0;
  int num_labels = 0;
  std::vector<char> allowed;

  static ArcMask full(int n, int num_labels) {
    ArcMask m;
    m.n = n;
    m.num_labels = num_labels;
    m.allowed.assign(static_cast<size_t>(n + 1) * n * num_labels, 1);
    for (int j = 1; j <= n; ++j)
      for (int l = 0; l < num_labels; ++l) m.set(j, j, l, false);
    return m;
  }
  static ArcMask none(int n, int num_labels) {
    ArcMask m;
    m.n = n;
    m.num_labels = num_labels;
    m.allowed.assign(static_cast<size_t>(n + 1) * n * num_labels, 0);
    return m;
  }

  size_t idx(int i, int j, int l) const {
    return (static_cast<size_t>(i) * n + (j - 1)) * num_labels + l;
  }
  bool get(int i, int j, int l) const { return allowed[idx(i, j, l)] != 0; }
  void set(int i, int j, int l, bool v) { allowed[idx(i, j, l)] = v ? 1 : 0; }

  bool operator==(const ArcMask&) const = default;
};

// head[j-1] in 0..n, label[j-1] in 0..L-1 for dependent j.
struct DepTree {
  std::vector<int> head;
  std::vector<int> label;

  int size() const { return static_cast<int>(head.size()); }
  bool operator==(const DepTree&) const = default;
  bool operator<(const DepTree& o) const {
    if (head != o.head) return head < o.head;
    return label < o.label;
  }
};

double tree_score(const ArcScores& scores, const DepTree& tree);
bool tree_in_mask(const ArcMask& mask, const DepTree& tree);

// Log of the sum over single-root trees compatible with the mask of
// exp(sum of arc scores). Returns -inf when the mask admits no tree.
double dep_log_partition(const ArcScores& scores, const ArcMask& mask);
double dep_log_partition(const ArcScores& scores);

SubstructureDist arc_marginals(const ArcScores& scores);
// Marginals of the mask-restricted distribution. Throws InferenceError if
// the mask admits no tree.
SubstructureDist arc_marginals(const ArcScores& scores, const ArcMask& mask);

// Number of single-root trees all of whose arcs are allowed.
double count_trees(const ArcMask& mask);

DepTree mst_decode(const ArcScores& scores);

// All single-root trees in deterministic order; n <= 6.
std::vector<DepTree> enumerate_trees(int n, int num_labels);

}  // namespace xfer

#endif

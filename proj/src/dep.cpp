#include "xfer/dep.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace xfer {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kForbidden = -1e18;

// Label-aggregated pair weights W(i, j) = sum_l exp(score - shift) over
// allowed labels; shift is the max allowed score.
struct PairWeights {
  int n;
  double shift;
  Eigen::MatrixXd w;  // (n+1) x (n+1), column j = dependent, w(i, j)
};

PairWeights aggregate(const ArcScores& scores, const ArcMask& mask,
                      bool unit_weights) {
  const int n = scores.n;
  const int L = scores.num_labels();
  double shift = kNegInf;
  if (!unit_weights) {
    for (int i = 0; i <= n; ++i)
      for (int j = 1; j <= n; ++j) {
        if (i == j) continue;
        for (int l = 0; l < L; ++l)
          if (mask.get(i, j, l)) shift = std::max(shift, scores.at(i, j, l));
      }
    if (shift == kNegInf) shift = 0.0;
  } else {
    shift = 0.0;
  }
  PairWeights pw{n, shift, Eigen::MatrixXd::Zero(n + 1, n + 1)};
  for (int i = 0; i <= n; ++i)
    for (int j = 1; j <= n; ++j) {
      if (i == j) continue;
      double w = 0.0;
      for (int l = 0; l < L; ++l)
        if (mask.get(i, j, l))
          w += unit_weights ? 1.0 : std::exp(scores.at(i, j, l) - shift);
      pw.w(i, j) = w;
    }
  return pw;
}

// Single-root matrix-tree matrix: row 1 holds the root weights, rows 2..n
// are Laplacian rows over internal heads only.
Eigen::MatrixXd root_laplacian(const PairWeights& pw) {
  const int n = pw.n;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int dep = 1; dep <= n; ++dep) {
    m(0, dep - 1) = pw.w(0, dep);
    if (dep >= 2) {
      double diag = 0.0;
      for (int h = 1; h <= n; ++h)
        if (h != dep) diag += pw.w(h, dep);
      m(dep - 1, dep - 1) = diag;
    }
    for (int h = 2; h <= n; ++h)
      if (h != dep) m(h - 1, dep - 1) = -pw.w(h, dep);
  }
  return m;
}

struct LogDet {
  double value;  // log |det|
  int sign;      // 0 when det underflows to zero
};

LogDet log_det(const Eigen::MatrixXd& m) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  const auto& u = lu.matrixLU();
  double logdet = 0.0;
  int sign = lu.permutationP().determinant() > 0 ? 1 : -1;
  for (int i = 0; i < m.rows(); ++i) {
    double d = u(i, i);
    if (d == 0.0) return {kNegInf, 0};
    if (d < 0) sign = -sign;
    logdet += std::log(std::abs(d));
  }
  return {logdet, sign};
}

// Upper bound on log det from column sums, used to decide whether a
// non-positive determinant is structural (no trees) or a degeneracy.
double log_det_bound(const Eigen::MatrixXd& m) {
  double bound = 0.0;
  for (int j = 0; j < m.cols(); ++j) {
    double s = m.col(j).cwiseAbs().sum();
    if (s <= 0.0) return kNegInf;
    bound += std::log(s) + 0.5 * std::log(double(m.rows()));
  }
  return bound;
}

bool column_has_weight(const PairWeights& pw, int dep) {
  for (int i = 0; i <= pw.n; ++i)
    if (i != dep && pw.w(i, dep) > 0.0) return true;
  return false;
}

double masked_log_partition_impl(const ArcScores& scores, const ArcMask& mask,
                                 bool unit_weights) {
  const int n = scores.n;
  PairWeights pw = aggregate(scores, mask, unit_weights);
  for (int dep = 1; dep <= n; ++dep)
    if (!column_has_weight(pw, dep)) return kNegInf;
  Eigen::MatrixXd m = root_laplacian(pw);
  LogDet ld = log_det(m);
  double bound = log_det_bound(m);
  if (ld.sign <= 0 || ld.value < bound + std::log(1e-12)) {
    if (ld.sign < 0 && ld.value >= bound + std::log(1e-12))
      throw InferenceError("matrix-tree determinant is negative beyond "
                           "tolerance (numerical degeneracy)");
    return kNegInf;
  }
  return ld.value + n * pw.shift;
}

SubstructureDist marginals_impl(const ArcScores& scores, const ArcMask& mask) {
  const int n = scores.n;
  const int L = scores.num_labels();
  PairWeights pw = aggregate(scores, mask, false);
  for (int dep = 1; dep <= n; ++dep)
    if (!column_has_weight(pw, dep))
      throw InferenceError("mask admits no tree: dependent " +
                           std::to_string(dep) + " has no allowed head");

  SubstructureDist dist;
  dist.pos.assign(n, std::vector<double>((n + 1) * L, 0.0));

  Eigen::MatrixXd pair_marg = Eigen::MatrixXd::Zero(n + 1, n + 1);
  if (n == 1) {
    pair_marg(0, 1) = 1.0;
  } else {
    Eigen::MatrixXd m = root_laplacian(pw);
    LogDet ld = log_det(m);
    if (ld.sign <= 0)
      throw InferenceError("mask admits no tree (zero partition function)");
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
    Eigen::MatrixXd inv = lu.inverse();
    for (int dep = 1; dep <= n; ++dep) {
      pair_marg(0, dep) = pw.w(0, dep) * inv(dep - 1, 0);
      for (int h = 1; h <= n; ++h) {
        if (h == dep) continue;
        double g = 0.0;
        if (dep >= 2) g += inv(dep - 1, dep - 1);
        if (h >= 2) g -= inv(dep - 1, h - 1);
        pair_marg(h, dep) = pw.w(h, dep) * g;
      }
    }
  }

  for (int dep = 1; dep <= n; ++dep) {
    auto& row = dist.pos[dep - 1];
    for (int h = 0; h <= n; ++h) {
      if (h == dep) continue;
      double pm = std::max(pair_marg(h, dep), 0.0);
      if (pw.w(h, dep) <= 0.0) continue;
      for (int l = 0; l < L; ++l) {
        if (!mask.get(h, dep, l)) continue;
        double share = std::exp(scores.at(h, dep, l) - pw.shift) / pw.w(h, dep);
        row[h * L + l] = pm * share;
      }
    }
  }
  return dist;
}

}  // namespace

double tree_score(const ArcScores& scores, const DepTree& tree) {
  double s = 0.0;
  for (int j = 1; j <= tree.size(); ++j)
    s += scores.at(tree.head[j - 1], j, tree.label[j - 1]);
  return s;
}

bool tree_in_mask(const ArcMask& mask, const DepTree& tree) {
  for (int j = 1; j <= tree.size(); ++j)
    if (!mask.get(tree.head[j - 1], j, tree.label[j - 1])) return false;
  return true;
}

double dep_log_partition(const ArcScores& scores, const ArcMask& mask) {
  if (scores.n < 1) throw InferenceError("empty sentence");
  return masked_log_partition_impl(scores, mask, false);
}

double dep_log_partition(const ArcScores& scores) {
  return dep_log_partition(scores,
                           ArcMask::full(scores.n, scores.num_labels()));
}

SubstructureDist arc_marginals(const ArcScores& scores) {
  return marginals_impl(scores, ArcMask::full(scores.n, scores.num_labels()));
}

SubstructureDist arc_marginals(const ArcScores& scores, const ArcMask& mask) {
  return marginals_impl(scores, mask);
}

double count_trees(const ArcMask& mask) {
  if (mask.n < 1) return 0.0;
  ArcScores unit(mask.n, std::vector<std::string>(mask.num_labels, ""));
  double lp = masked_log_partition_impl(unit, mask, true);
  if (lp == kNegInf) return 0.0;
  return std::round(std::exp(lp));
}

namespace {

// Chu-Liu/Edmonds maximum arborescence rooted at node 0 on a dense graph.
// w(u, v) is the weight of arc u -> v; kForbidden marks absent arcs.
// Ties prefer the smaller head index.
std::vector<int> chu_liu_edmonds(Eigen::MatrixXd w) {
  const int n_nodes = static_cast<int>(w.rows());
  std::vector<int> best_in(n_nodes, -1);
  for (int v = 1; v < n_nodes; ++v) {
    double best = kForbidden * 2;
    for (int u = 0; u < n_nodes; ++u) {
      if (u == v) continue;
      if (w(u, v) > best) {
        best = w(u, v);
        best_in[v] = u;
      }
    }
  }

  // Find a cycle among the greedy choices.
  std::vector<int> color(n_nodes, 0);
  std::vector<int> cycle;
  for (int start = 1; start < n_nodes && cycle.empty(); ++start) {
    if (color[start]) continue;
    int v = start;
    std::vector<int> path;
    while (v != 0 && color[v] == 0) {
      color[v] = 1;
      path.push_back(v);
      v = best_in[v];
    }
    if (v != 0 && color[v] == 1) {
      // v is on the current path: extract the cycle.
      auto it = std::find(path.begin(), path.end(), v);
      cycle.assign(it, path.end());
    }
    for (int u : path) color[u] = 2;
  }
  if (cycle.empty()) return best_in;

  // Contract the cycle into a single node and recurse.
  std::vector<char> in_cycle(n_nodes, 0);
  double cycle_weight = 0.0;
  for (int v : cycle) {
    in_cycle[v] = 1;
    cycle_weight += w(best_in[v], v);
  }
  std::vector<int> old_of;          // contracted id -> original id
  std::vector<int> new_of(n_nodes, -1);
  for (int v = 0; v < n_nodes; ++v) {
    if (!in_cycle[v]) {
      new_of[v] = static_cast<int>(old_of.size());
      old_of.push_back(v);
    }
  }
  const int cyc_id = static_cast<int>(old_of.size());
  const int n_contracted = cyc_id + 1;

  Eigen::MatrixXd cw =
      Eigen::MatrixXd::Constant(n_contracted, n_contracted, kForbidden);
  // enter_via[u'] = cycle node reached by the best arc from u' into the cycle
  std::vector<int> enter_via(n_contracted, -1);
  std::vector<int> leave_via(n_contracted, -1);
  for (int u = 0; u < n_nodes; ++u) {
    if (in_cycle[u]) continue;
    int nu = new_of[u];
    for (int v = 0; v < n_nodes; ++v) {
      if (v == u) continue;
      if (in_cycle[v]) {
        double adj = w(u, v) - w(best_in[v], v);
        if (adj > cw(nu, cyc_id)) {
          cw(nu, cyc_id) = adj;
          enter_via[nu] = v;
        }
      } else {
        cw(nu, new_of[v]) = w(u, v);
      }
    }
  }
  for (int v = 0; v < n_nodes; ++v) {
    if (in_cycle[v]) continue;
    int nv = new_of[v];
    double best = kForbidden * 2;
    for (int u : cycle) {
      if (w(u, v) > best) {
        best = w(u, v);
        leave_via[nv] = u;
      }
    }
    cw(cyc_id, nv) = best;
  }

  std::vector<int> sub = chu_liu_edmonds(cw);

  std::vector<int> parent(n_nodes, -1);
  // Arcs between non-cycle nodes and arcs out of the cycle.
  for (int nv = 1; nv < n_contracted; ++nv) {
    if (nv == cyc_id) continue;
    int v = old_of[nv];
    int nu = sub[nv];
    parent[v] = (nu == cyc_id) ? leave_via[nv] : old_of[nu];
  }
  // The arc entering the cycle breaks it at enter_via.
  int entry_parent_new = sub[cyc_id];
  int entry_node = enter_via[entry_parent_new];
  for (int v : cycle) parent[v] = best_in[v];
  parent[entry_node] = old_of[entry_parent_new];
  (void)cycle_weight;
  return parent;
}

}  // namespace

DepTree mst_decode(const ArcScores& scores) {
  const int n = scores.n;
  const int L = scores.num_labels();
  if (n < 1) throw InferenceError("empty sentence");

  // Best label per head-dependent pair; ties go to the lexicographically
  // smaller label name.
  std::vector<std::vector<int>> best_label(n + 1, std::vector<int>(n + 1, 0));
  Eigen::MatrixXd w = Eigen::MatrixXd::Constant(n + 1, n + 1, kForbidden);
  for (int i = 0; i <= n; ++i)
    for (int j = 1; j <= n; ++j) {
      if (i == j) continue;
      int best = 0;
      for (int l = 1; l < L; ++l) {
        double d = scores.at(i, j, l) - scores.at(i, j, best);
        if (d > 0 || (d == 0 && scores.labels[l] < scores.labels[best]))
          best = l;
      }
      best_label[i][j] = best;
      w(i, j) = scores.at(i, j, best);
    }

  DepTree result;
  double best_total = kNegInf;
  for (int r = 1; r <= n; ++r) {
    Eigen::MatrixXd wr = w;
    for (int j = 1; j <= n; ++j)
      if (j != r) wr(0, j) = kForbidden;
    std::vector<int> parent = chu_liu_edmonds(wr);
    double total = 0.0;
    bool valid = true;
    for (int j = 1; j <= n; ++j) {
      if (parent[j] == 0 && j != r) valid = false;
      total += w(parent[j], j);
    }
    if (!valid || total <= kForbidden / 2) continue;
    if (total > best_total + 1e-12) {
      best_total = total;
      result.head.assign(parent.begin() + 1, parent.end());
      result.label.resize(n);
      for (int j = 1; j <= n; ++j)
        result.label[j - 1] = best_label[parent[j]][j];
    }
  }
  return result;
}

std::vector<DepTree> enumerate_trees(int n, int num_labels) {
  if (n < 1 || n > 6)
    throw InferenceError("enumerate_trees supports 1 <= n <= 6");
  std::vector<DepTree> out;
  std::vector<int> head(n, 0);

  auto valid = [&]() {
    int roots = 0;
    for (int j = 1; j <= n; ++j)
      if (head[j - 1] == 0) ++roots;
    if (roots != 1) return false;
    for (int j = 1; j <= n; ++j) {
      int cur = j, steps = 0;
      while (cur != 0) {
        cur = head[cur - 1];
        if (++steps > n) return false;
      }
    }
    return true;
  };

  std::vector<int> label(n, 0);
  auto emit_labels = [&]() {
    // Lexicographic over label assignments, last position fastest.
    std::fill(label.begin(), label.end(), 0);
    while (true) {
      out.push_back(DepTree{head, label});
      int k = n - 1;
      while (k >= 0 && label[k] == num_labels - 1) label[k--] = 0;
      if (k < 0) break;
      ++label[k];
    }
  };

  // Lexicographic over head vectors.
  while (true) {
    bool self_loop = false;
    for (int j = 1; j <= n; ++j)
      if (head[j - 1] == j) self_loop = true;
    if (!self_loop && valid()) emit_labels();
    int k = n - 1;
    while (k >= 0 && head[k] == n) head[k--] = 0;
    if (k < 0) break;
    ++head[k];
  }
  return out;
}

}  // namespace xfer

#ifndef XFER_CHART_HPP
#define XFER_CHART_HPP

#include <string>
#include <vector>

#include "xfer/crf.hpp"
#include "xfer/dep.hpp"
#include "xfer/substructure.hpp"

namespace xfer {

// Smallest prefix of the distribution, taken in descending probability
// (ties by ascending substructure id), whose cumulative mass reaches
// sigma. Never empty. Returns the selected ids in ascending order.
std::vector<int> threshold_select(const std::vector<double>& probs,
                                  double sigma);

// Normalized weighted geometric mean of per-position distributions.
// Probabilities are clamped to >= 1e-12 before exponentiation.
SubstructureDist lop_pool(const std::vector<SubstructureDist>& dists,
                          const std::vector<double>& alphas);

// Allowed-substructure mask plus 1-best structures that the mask does not
// already cover. Extras are deduplicated and each has at least one
// substructure outside the mask.
struct DepChart {
  ArcMask mask;
  std::vector<DepTree> extras;

  bool operator==(const DepChart&) const = default;
};

struct ChainChart {
  PairMask mask;
  std::vector<TagSeq> extras;

  bool operator==(const ChainChart&) const = default;
};

// Chart construction from per-source marginals and 1-best structures.
// pptx: threshold each source separately, then union the selections.
// lop: pool first, threshold the pooled distribution.
DepChart build_dep_chart_pptx(const std::vector<SubstructureDist>& marginals,
                              const std::vector<DepTree>& one_bests, int n,
                              int num_labels, double sigma);
DepChart build_dep_chart_lop(const std::vector<SubstructureDist>& marginals,
                             const std::vector<DepTree>& one_bests, int n,
                             int num_labels, double sigma,
                             const std::vector<double>& alphas);
ChainChart build_chain_chart_pptx(
    const std::vector<SubstructureDist>& marginals,
    const std::vector<TagSeq>& one_bests, int n, int num_tags, double sigma);
ChainChart build_chain_chart_lop(const std::vector<SubstructureDist>& marginals,
                                 const std::vector<TagSeq>& one_bests, int n,
                                 int num_tags, double sigma,
                                 const std::vector<double>& alphas);

// Chart membership in the induced set (mask-induced structures + extras).
bool chart_contains(const DepChart& chart, const DepTree& tree);
bool chart_contains(const ChainChart& chart, const TagSeq& seq);

std::string dep_chart_to_json(const DepChart& chart,
                              const std::vector<std::string>& labels);
std::string chain_chart_to_json(const ChainChart& chart,
                                const std::vector<std::string>& tags);
DepChart dep_chart_from_json(const std::string& text);
ChainChart chain_chart_from_json(const std::string& text);

}  // namespace xfer

#endif

#ifndef XFER_METRICS_HPP
#define XFER_METRICS_HPP

#include <string>
#include <vector>

#include "xfer/chart.hpp"
#include "xfer/conllu.hpp"
#include "xfer/ensemble.hpp"

namespace xfer {

class MetricsError : public std::runtime_error {
 public:
  explicit MetricsError(const std::string& msg) : std::runtime_error(msg) {}
};

constexpr double kDefaultEnumCap = 1e6;

struct ChartStats {
  double size_masked = 0.0;
  double size_total = 0.0;
};

ChartStats chart_size(const DepChart& chart);
ChartStats chart_size(const ChainChart& chart);

// All members of the induced set (mask-induced plus extras). Throws
// MetricsError when the induced count exceeds the cap.
std::vector<DepTree> chart_members(const DepChart& chart,
                                   double cap = kDefaultEnumCap);
std::vector<TagSeq> chart_members(const ChainChart& chart,
                                  double cap = kDefaultEnumCap);

// Per-sentence precision/recall numerators and denominators; corpus-level
// scores are the micro-averaged ratios.
struct PrCounts {
  double precision_num = 0.0;
  double precision_den = 0.0;
  double recall_num = 0.0;
  double recall_den = 0.0;
};

PrCounts chart_pr(const DepChart& chart, const DepTree& gold,
                  double cap = kDefaultEnumCap);
PrCounts chart_pr(const ChainChart& chart, const TagSeq& gold,
                  double cap = kDefaultEnumCap);

double chart_precision(const std::vector<PrCounts>& counts);
double chart_recall(const std::vector<PrCounts>& counts);

struct EvalReport {
  std::string metric;  // "LAS" or "UPOS accuracy"
  size_t correct = 0;
  size_t total = 0;
  double accuracy = 0.0;
};

// Parsing: a token counts as correct iff head and label both match;
// UPOS == "PUNCT" tokens are excluded. Tagging: per-token tag match.
EvalReport evaluate(const Corpus& pred, const Corpus& gold, Task task);

}  // namespace xfer

#endif

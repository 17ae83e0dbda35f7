#ifndef XFER_SUBSTRUCTURE_HPP
#define XFER_SUBSTRUCTURE_HPP

#include <vector>

namespace xfer {

enum class Task { Parsing, Tagging };

// Per-position marginal distributions over competing substructures.
//
// Parsing: pos[j-1] has (n+1)*L entries indexed i*L + l for head i in 0..n
// and label l; entries with i == j are structurally impossible and stay 0.
// Tagging: pos[j-1], j in 1..n-1, has T*T entries indexed t*T + t' for the
// tag pair at (j, j+1). A length-1 sentence has a single position with T
// unary entries.
struct SubstructureDist {
  std::vector<std::vector<double>> pos;

  int positions() const { return static_cast<int>(pos.size()); }
};

}  // namespace xfer

#endif

/**
 * @file selection.hpp
 * @brief Binary beam-selection vectors and the sort-based selection rule.
 */
#pragma once

#include "beamsparse/channel.hpp"

namespace beamsparse {

/// Length-M binary vector with exactly K_s ones. Iterates of the sparse
/// solvers are always binary; the box relaxation exists only inside the
/// gradient/oracle machinery.
struct SelectionVector {
  IVec delta;  // entries in {0,1}
  int K_s = 0;

  int M() const { return static_cast<int>(delta.size()); }
  std::vector<int> support() const;  // sorted active indices
  int hamming_distance(const SelectionVector& other) const;
  void validate() const;  // throws if entries are non-binary or the count is off

  static SelectionVector from_support(int m, const std::vector<int>& support);
  static SelectionVector all_active(int m);
};

/// Ones at the indices of the K_s smallest entries of `cost`; ties broken by
/// lowest index.
SelectionVector select_beams(const RVec& cost, int k_s);

/// Top-k_s largest entries (used for energy-based initialization and the
/// greedy baseline); ties broken by lowest index.
std::vector<int> largest_indices(const RVec& values, int k_s);

}  // namespace beamsparse

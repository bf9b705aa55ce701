/**
 * @file precoder.hpp
 * @brief Recovered sparse precoder solutions (angle and antenna domain).
 */
#pragma once

#include "beamsparse/channel.hpp"
#include "beamsparse/selection.hpp"

namespace beamsparse {

/// Row-sparse precoding solution. `deltas` holds one selection vector per
/// user; for common-support solutions all entries are identical and
/// `common_support` is true. Rows of P[k] outside user k's support are
/// exactly zero, and P_ant[k] = F^H P[k].
struct PrecoderSolution {
  std::vector<SelectionVector> deltas;
  bool common_support = true;
  std::vector<CMat> X;   // subspace coefficients (empty for the greedy baseline)
  double omega = 1.0;    // power-restoring scale applied to the coefficients
  std::vector<CMat> P;      // angle domain, M x D_k
  std::vector<CMat> P_ant;  // antenna domain, M x D_k

  double total_power() const;  // sum_k ||P[k]||_F^2
  /// Aggregate M x D angle-domain precoder [P_1 ... P_K].
  CMat aggregate() const;
  /// Aggregate M x D antenna-domain precoder.
  CMat aggregate_ant() const;
};

/// Worst-case relative residual of projecting each column of P[k] onto
/// span(diag(delta_k) H^H); ~0 certifies the subspace structure.
double projection_residual(const PrecoderSolution& sol, const ChannelSet& ch);

/// Orthonormal basis (as columns, embedded in C^M) of span(diag(delta) H^H),
/// computed by rank-revealing QR of the support-compressed block.
CMat support_subspace_basis(const ChannelSet& ch, const SelectionVector& delta);

}  // namespace beamsparse

/**
 * @file wmmse_dense.hpp
 * @brief Dense WMMSE baseline (full-dimensional precoder update) and the
 * greedy channel-energy sparse baseline.
 *
 * The power budget is absorbed into an effective noise term during the
 * iteration and restored by an exact rescale of the final iterate, so every
 * block update is unconstrained.
 */
#pragma once

#include <utility>

#include "beamsparse/precoder.hpp"
#include "beamsparse/rate.hpp"

namespace beamsparse {

/// Angle-domain precoders without sparsity, one M x D_k block per user.
struct DensePrecoder {
  std::vector<CMat> V;
  double power() const;
};

struct DenseTraceRow {
  int iteration = 0;
  double wsr_bits = 0.0;
  double power_used = 0.0;
};

using DenseTrace = std::vector<DenseTraceRow>;

/// V_k = first D_k columns of H_k^H, jointly scaled to the power budget.
DensePrecoder matched_filter_init(const ChannelSet& ch, const SystemConfig& cfg);

/// WMMSE restricted to the given beam support: precoder rows outside
/// `support` are pinned to zero and the precoder update inverts a
/// |support|-dimensional system. `init` rows outside the support are dropped.
std::pair<DensePrecoder, DenseTrace> wmmse_on_support(
    const SystemConfig& cfg, const ChannelSet& ch, const std::vector<int>& support,
    const DensePrecoder& init, int max_iter, double tol);

/// Dense baseline: wmmse_on_support with every beam active (M-dimensional
/// precoder update).
std::pair<DensePrecoder, DenseTrace> dense_wmmse_solve(const SystemConfig& cfg,
                                                       const ChannelSet& ch,
                                                       const DensePrecoder& init,
                                                       int max_iter, double tol);

/// Sparse baseline standing in for regularization-based row-sparse WMMSE:
/// keep the K_s largest-energy beams of the aggregate channel, then run the
/// restricted WMMSE on that common support.
PrecoderSolution greedy_energy_select_then_wmmse(const SystemConfig& cfg,
                                                 const ChannelSet& ch,
                                                 int max_iter = 50, double tol = 1e-5);

/// Wraps a dense solve result as a PrecoderSolution on the given support.
PrecoderSolution solution_from_dense(const DensePrecoder& dense,
                                     const std::vector<int>& support);

}  // namespace beamsparse

/**
 * @file allsp.hpp
 * @brief Angle-level sparse precoding: block-coordinate WMMSE updates over
 * low-dimensional coefficients plus a penalty-based majorize-minimization
 * beam-selection step with a common support for all users.
 *
 * All beam-masked products (H_k diag(delta) H^H and friends) are computed by
 * selecting columns of the angle-domain channels; an M x M selection matrix
 * is never materialized. The transmit power budget is absorbed into an
 * effective noise term and restored exactly at recovery.
 */
#pragma once

#include <utility>

#include "beamsparse/precoder.hpp"
#include "beamsparse/rate.hpp"

namespace beamsparse {

/// Solver variables for the common-support scheme: receive filters U_k
/// (N_k x D_k), MSE weight matrices W_k (D_k x D_k, Hermitian positive
/// definite), subspace coefficients X_k (N x D_k), the binary selection
/// vector, the power-regularization scalar mu and the concavity penalty beta.
struct AllspState {
  std::vector<CMat> U;
  std::vector<CMat> W;
  std::vector<CMat> X;
  SelectionVector delta;
  double mu = 0.0;
  double beta = 0.0;
};

struct SparseTraceRow {
  int iteration = 0;
  double wsr_bits = 0.0;
  double objective_nats = 0.0;
  double beta = 0.0;
  double mu = 0.0;
  int delta_hamming_change = 0;
  std::vector<std::vector<int>> active_beams;  // one entry (common) or K entries
};

using SparseTrace = std::vector<SparseTraceRow>;

struct SparseOptions {
  int max_iter = 50;
  double tol = 1e-5;
  /// Selection cost c = grad f - 2*beta*delta (the MM majorizer gradient).
  /// false reproduces the plain-gradient variant.
  bool penalized_selection_gradient = true;
  /// Keep the initial selection(s) fixed (pure subspace WMMSE).
  bool freeze_selection = false;
};

/// H_k diag(delta) H^H, computed as H_k(:,S) H(:,S)^H. Size N_k x N.
CMat effective_channel(const CMat& h_all, const CMat& h_k, const SelectionVector& delta);

/// Per-user effective noise levels (sigma_k^2 / P_max) sum_i tr(X_i^H HdH^H X_i).
std::vector<double> effective_noise(const SystemConfig& cfg, const AllspState& state,
                                    const ChannelSet& ch);

/// MMSE receive filters for fixed coefficients and selection.
std::vector<CMat> update_U(const AllspState& state, const ChannelSet& ch,
                           const SystemConfig& cfg);

/// Weight matrices W_k = (I - U_k^H (H_k d H^H) X_k)^{-1}, symmetrized.
std::vector<CMat> update_W(const AllspState& state, const ChannelSet& ch,
                           const SystemConfig& cfg);

struct XUpdate {
  std::vector<CMat> X;
  double mu = 0.0;
  bool reinitialized = false;  // singular system fallback was taken
};

/// Regularized N x N normal-equation solve for the coefficients; also
/// returns the power-regularization scalar mu.
XUpdate update_X(const AllspState& state, const ChannelSet& ch, const SystemConfig& cfg);

/// Concavity penalty: 1.1 x Gershgorin upper bound on lambda_max of the
/// selection-objective Hessian factor, floored at 1e-12.
double penalty_beta(const AllspState& state, const ChannelSet& ch, const SystemConfig& cfg);

/// Gradient of the selection objective f at the state's binary delta.
RVec grad_f_delta(const AllspState& state, const ChannelSet& ch, const SystemConfig& cfg);

/// Gradient of f at an arbitrary (relaxed) diagonal point.
RVec grad_f_delta_at(const AllspState& state, const ChannelSet& ch,
                     const SystemConfig& cfg, const RVec& delta_relaxed);

/// f evaluated at a relaxed diagonal; used by oracles and gradient checks.
double eval_f_delta(const AllspState& state, const ChannelSet& ch,
                    const SystemConfig& cfg, const RVec& delta_relaxed);

/// Full WMMSE surrogate objective sum_k alpha_k (tr(W_k E_k) - logdet W_k),
/// in nats, at the current state.
double wmmse_objective(const AllspState& state, const ChannelSet& ch,
                       const SystemConfig& cfg);

/// Energy-based selection plus block-identity coefficients (the common
/// deterministic starting point).
AllspState allsp_init(const SystemConfig& cfg, const ChannelSet& ch);

/// Block-selector coefficients: X_k picks user k's first D_k receive antennas,
/// so diag(delta) H^H X_k is the masked matched filter.
std::vector<CMat> matched_filter_coefficients(const SystemConfig& cfg);

/// P_k = sqrt(omega) diag(delta) H^H X_k with omega restoring the power
/// budget with equality; antenna-domain blocks are F^H P_k.
PrecoderSolution recover_precoder(const AllspState& state, const ChannelSet& ch,
                                  const SystemConfig& cfg);

std::pair<PrecoderSolution, SparseTrace> allsp_solve(const SystemConfig& cfg,
                                                     const ChannelSet& ch,
                                                     const AllspState& init,
                                                     const SparseOptions& opt = {});

}  // namespace beamsparse

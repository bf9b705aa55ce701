/**
 * @file aullsp.hpp
 * @brief Angle-user-level sparse precoding: the common-support scheme
 * generalized to one selection vector per user. The selection subproblem
 * decouples across users given fixed filters/weights/coefficients, so the K
 * per-user sorts are independent.
 */
#pragma once

#include <utility>

#include "beamsparse/allsp.hpp"

namespace beamsparse {

/// Per-user selection variant of AllspState: delta[k] has exactly K_s active
/// beams for every user; gamma is the power-regularization scalar and
/// beta[k] the per-user concavity penalties.
struct AullspState {
  std::vector<CMat> U;
  std::vector<CMat> W;
  std::vector<CMat> X;
  std::vector<SelectionVector> delta;
  double gamma = 0.0;
  std::vector<double> beta;
};

std::vector<double> effective_noise_user(const SystemConfig& cfg,
                                         const AullspState& state,
                                         const ChannelSet& ch);

std::vector<CMat> update_U_user(const AullspState& state, const ChannelSet& ch,
                                const SystemConfig& cfg);

std::vector<CMat> update_W_user(const AullspState& state, const ChannelSet& ch,
                                const SystemConfig& cfg);

struct XUpdateUser {
  std::vector<CMat> X;
  double gamma = 0.0;
  bool reinitialized = false;
};

/// Per-user N x N solves; the system matrix of user k applies user k's own
/// selection on both sides with every user's filter statistics.
XUpdateUser update_X_user(const AullspState& state, const ChannelSet& ch,
                          const SystemConfig& cfg);

double penalty_beta_user(const AullspState& state, const ChannelSet& ch,
                         const SystemConfig& cfg, int user);

RVec grad_fk_delta(const AullspState& state, const ChannelSet& ch,
                   const SystemConfig& cfg, int user);

RVec grad_fk_delta_at(const AullspState& state, const ChannelSet& ch,
                      const SystemConfig& cfg, int user, const RVec& delta_relaxed);

double eval_fk_delta(const AullspState& state, const ChannelSet& ch,
                     const SystemConfig& cfg, int user, const RVec& delta_relaxed);

/// K independent penalized-gradient sorts (Jacobi across users on the state
/// snapshot).
std::vector<SelectionVector> select_beams_per_user(const AullspState& state,
                                                   const ChannelSet& ch,
                                                   const SystemConfig& cfg,
                                                   bool penalized_gradient = true);

double wmmse_objective_user(const AullspState& state, const ChannelSet& ch,
                            const SystemConfig& cfg);

AullspState aullsp_init(const SystemConfig& cfg, const ChannelSet& ch);

/// P_k = sqrt(omega) diag(delta_k) H^H X_k with a single omega restoring the
/// total power budget.
PrecoderSolution recover_precoder_user(const AullspState& state, const ChannelSet& ch,
                                       const SystemConfig& cfg);

std::pair<PrecoderSolution, SparseTrace> aullsp_solve(const SystemConfig& cfg,
                                                      const ChannelSet& ch,
                                                      const AullspState& init,
                                                      const SparseOptions& opt = {});

}  // namespace beamsparse

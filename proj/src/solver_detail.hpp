// Shared internals of the sparse WMMSE solvers.
#pragma once

#include "beamsparse/channel.hpp"

namespace beamsparse::detail {

/// Column subset h(:, sup).
inline CMat masked_cols(const CMat& h, const std::vector<int>& sup) {
  CMat out(h.rows(), static_cast<Eigen::Index>(sup.size()));
  for (size_t i = 0; i < sup.size(); ++i) out.col(i) = h.col(sup[i]);
  return out;
}

/// sum_k alpha_k H_k^H U_k W_k U_k^H H_k, size M x M.
CMat filter_stat_matrix(const ChannelSet& ch, const std::vector<double>& alpha,
                        const std::vector<CMat>& U, const std::vector<CMat>& W);

/// sum_i (sigma_i^2 / P_max) alpha_i tr(U_i W_i U_i^H).
double power_regularizer(const SystemConfig& cfg, const std::vector<CMat>& U,
                         const std::vector<CMat>& W);

/// Re{diag(alpha_k (H^H X_k)(W_k U_k^H H_k))} for one user, length M.
RVec re_diag_cross_user(const ChannelSet& ch, double alpha, const CMat& x,
                        const CMat& u, const CMat& w, const CMat& h_k);

}  // namespace beamsparse::detail

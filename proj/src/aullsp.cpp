#include "beamsparse/aullsp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "solver_detail.hpp"

namespace beamsparse {

namespace {

// Per-user masked products: Hs[j] = H(:,S_j), T(k,j) = H_k diag(delta_j) H^H.
struct MaskedChannelsUser {
  std::vector<CMat> Hs;               // N x K_s each
  std::vector<std::vector<CMat>> T;   // T[k][j], N_k x N

  const CMat& t(int k, int j) const { return T[k][j]; }
};

MaskedChannelsUser masked_channels_user(const ChannelSet& ch,
                                        const std::vector<SelectionVector>& delta) {
  MaskedChannelsUser mc;
  const int k_users = static_cast<int>(ch.H.size());
  mc.Hs.resize(k_users);
  std::vector<std::vector<int>> sup(k_users);
  for (int j = 0; j < k_users; ++j) {
    sup[j] = delta[j].support();
    mc.Hs[j] = detail::masked_cols(ch.H_all, sup[j]);
  }
  mc.T.assign(k_users, std::vector<CMat>(k_users));
  for (int k = 0; k < k_users; ++k)
    for (int j = 0; j < k_users; ++j)
      mc.T[k][j] = detail::masked_cols(ch.H[k], sup[j]) * mc.Hs[j].adjoint();
  return mc;
}

// sum_j tr(X_j^H H diag(delta_j) H^H X_j).
double support_power_user(const MaskedChannelsUser& mc, const std::vector<CMat>& x) {
  double s = 0.0;
  for (size_t j = 0; j < x.size(); ++j) s += (mc.Hs[j].adjoint() * x[j]).squaredNorm();
  return s;
}

// Pieces of the per-user selection objective
//   f_k(d) = d^T Omega_k d - 2 d . r_k + gamma d . b_k
// with Omega_k = Re{A o B_k^T}, B_k = (H^H X_k)(H^H X_k)^H.
struct SelectionObjectiveUser {
  RMat omega;
  RVec r;
  RVec b;
  double gamma = 0.0;
};

SelectionObjectiveUser selection_objective_user(const AullspState& state,
                                                const ChannelSet& ch,
                                                const SystemConfig& cfg, int user) {
  SelectionObjectiveUser so;
  const CMat a = detail::filter_stat_matrix(ch, cfg.alpha, state.U, state.W);
  const CMat c = ch.H_all.adjoint() * state.X[user];  // M x D_k
  const CMat b = c * c.adjoint();
  so.omega = a.cwiseProduct(b.transpose()).real();
  so.b = b.diagonal().real();
  so.r = detail::re_diag_cross_user(ch, cfg.alpha[user], state.X[user], state.U[user],
                                    state.W[user], ch.H[user]);
  so.gamma = state.gamma;
  return so;
}

double gershgorin_max_bound(const RMat& omega) {
  double bound = 0.0;
  for (Eigen::Index i = 0; i < omega.rows(); ++i) {
    const double radius = omega.row(i).cwiseAbs().sum() - std::abs(omega(i, i));
    bound = std::max(bound, omega(i, i) + radius);
  }
  return bound;
}

void check_state(const AullspState& state, const SystemConfig& cfg) {
  if (static_cast<int>(state.delta.size()) != cfg.K)
    throw std::invalid_argument("aullsp: one selection vector per user required");
  for (const auto& d : state.delta) {
    d.validate();
    if (d.K_s != cfg.K_s)
      throw std::invalid_argument("aullsp: every selection must have K_s active beams");
  }
}

}  // namespace

std::vector<double> effective_noise_user(const SystemConfig& cfg,
                                         const AullspState& state,
                                         const ChannelSet& ch) {
  double s = 0.0;
  for (int j = 0; j < cfg.K; ++j) {
    const CMat hs = detail::masked_cols(ch.H_all, state.delta[j].support());
    s += (hs.adjoint() * state.X[j]).squaredNorm();
  }
  std::vector<double> noise(cfg.K);
  for (int k = 0; k < cfg.K; ++k) noise[k] = cfg.sigma2[k] / cfg.P_max * s;
  return noise;
}

std::vector<CMat> update_U_user(const AullspState& state, const ChannelSet& ch,
                                const SystemConfig& cfg) {
  const MaskedChannelsUser mc = masked_channels_user(ch, state.delta);
  const double s = support_power_user(mc, state.X);
  if (s <= 0.0)
    throw DegenerateStateError("update_U_user: all coefficients vanished on their supports");
  std::vector<CMat> u(cfg.K);
  for (int k = 0; k < cfg.K; ++k) {
    const double noise = cfg.sigma2[k] / cfg.P_max * s;
    CMat cov = noise * CMat::Identity(cfg.N_k[k], cfg.N_k[k]);
    for (int j = 0; j < cfg.K; ++j) {
      const CMat tx = mc.t(k, j) * state.X[j];
      cov.noalias() += tx * tx.adjoint();
    }
    u[k] = cov.ldlt().solve(mc.t(k, k) * state.X[k]);
  }
  return u;
}

std::vector<CMat> update_W_user(const AullspState& state, const ChannelSet& ch,
                                const SystemConfig& cfg) {
  const MaskedChannelsUser mc = masked_channels_user(ch, state.delta);
  std::vector<CMat> w(cfg.K);
  for (int k = 0; k < cfg.K; ++k) {
    const CMat e = CMat::Identity(cfg.D_k[k], cfg.D_k[k]) -
                   state.U[k].adjoint() * mc.t(k, k) * state.X[k];
    Eigen::FullPivLU<CMat> lu(e);
    if (!lu.isInvertible())
      throw DegenerateStateError("update_W_user: singular MSE matrix for user " +
                                 std::to_string(k));
    w[k] = lu.inverse();
    w[k] = 0.5 * (w[k] + w[k].adjoint().eval());
  }
  return w;
}

XUpdateUser update_X_user(const AullspState& state, const ChannelSet& ch,
                          const SystemConfig& cfg) {
  const MaskedChannelsUser mc = masked_channels_user(ch, state.delta);
  XUpdateUser out;
  out.gamma = detail::power_regularizer(cfg, state.U, state.W);
  out.X.resize(cfg.K);
  bool bad = false;
  for (int k = 0; k < cfg.K && !bad; ++k) {
    CMat a = out.gamma * (mc.Hs[k] * mc.Hs[k].adjoint());
    for (int i = 0; i < cfg.K; ++i) {
      const CMat f = mc.t(i, k).adjoint() * state.U[i];  // N x D_i
      a.noalias() += cfg.alpha[i] * f * state.W[i] * f.adjoint();
    }
    const CMat rhs = cfg.alpha[k] * mc.t(k, k).adjoint() * state.U[k] * state.W[k];
    CMat x = a.ldlt().solve(rhs);
    const double res_scale = a.norm() * x.norm() + rhs.norm() + 1e-300;
    if (!x.allFinite() || (a * x - rhs).norm() > 1e-9 * res_scale) {
      x = a.completeOrthogonalDecomposition().solve(rhs);
      if (!x.allFinite()) bad = true;
    }
    out.X[k] = std::move(x);
  }
  if (bad || out.gamma <= 0.0) {
    out.X = matched_filter_coefficients(cfg);
    out.reinitialized = true;
  }
  return out;
}

double penalty_beta_user(const AullspState& state, const ChannelSet& ch,
                         const SystemConfig& cfg, int user) {
  const SelectionObjectiveUser so = selection_objective_user(state, ch, cfg, user);
  return std::max(1.1 * gershgorin_max_bound(so.omega), 1e-12);
}

RVec grad_fk_delta_at(const AullspState& state, const ChannelSet& ch,
                      const SystemConfig& cfg, int user, const RVec& delta_relaxed) {
  if (delta_relaxed.size() != cfg.M)
    throw std::invalid_argument("grad_fk_delta: delta length must be M");
  const SelectionObjectiveUser so = selection_objective_user(state, ch, cfg, user);
  return 2.0 * (so.omega * delta_relaxed) - 2.0 * so.r + so.gamma * so.b;
}

RVec grad_fk_delta(const AullspState& state, const ChannelSet& ch,
                   const SystemConfig& cfg, int user) {
  return grad_fk_delta_at(state, ch, cfg, user, state.delta[user].delta.cast<double>());
}

double eval_fk_delta(const AullspState& state, const ChannelSet& ch,
                     const SystemConfig& cfg, int user, const RVec& delta_relaxed) {
  if (delta_relaxed.size() != cfg.M)
    throw std::invalid_argument("eval_fk_delta: delta length must be M");
  const SelectionObjectiveUser so = selection_objective_user(state, ch, cfg, user);
  return delta_relaxed.dot(so.omega * delta_relaxed) - 2.0 * so.r.dot(delta_relaxed) +
         so.gamma * so.b.dot(delta_relaxed);
}

std::vector<SelectionVector> select_beams_per_user(const AullspState& state,
                                                   const ChannelSet& ch,
                                                   const SystemConfig& cfg,
                                                   bool penalized_gradient) {
  std::vector<SelectionVector> next(cfg.K);
  for (int k = 0; k < cfg.K; ++k) {
    RVec cost = grad_fk_delta(state, ch, cfg, k);
    if (penalized_gradient) {
      const double beta = penalty_beta_user(state, ch, cfg, k);
      cost -= 2.0 * beta * state.delta[k].delta.cast<double>();
    }
    next[k] = select_beams(cost, cfg.K_s);
  }
  return next;
}

double wmmse_objective_user(const AullspState& state, const ChannelSet& ch,
                            const SystemConfig& cfg) {
  const MaskedChannelsUser mc = masked_channels_user(ch, state.delta);
  const double s = support_power_user(mc, state.X);
  double obj = 0.0;
  for (int k = 0; k < cfg.K; ++k) {
    const double noise = cfg.sigma2[k] / cfg.P_max * s;
    const CMat tx_k = mc.t(k, k) * state.X[k];
    const CMat d = CMat::Identity(cfg.D_k[k], cfg.D_k[k]) - state.U[k].adjoint() * tx_k;
    CMat e = d * d.adjoint();
    for (int j = 0; j < cfg.K; ++j) {
      if (j == k) continue;
      const CMat tx = mc.t(k, j) * state.X[j];
      e.noalias() += state.U[k].adjoint() * tx * tx.adjoint() * state.U[k];
    }
    e.noalias() += noise * state.U[k].adjoint() * state.U[k];
    obj += cfg.alpha[k] *
           ((state.W[k] * e).trace().real() - logdet_hermitian(state.W[k]));
  }
  return obj;
}

AullspState aullsp_init(const SystemConfig& cfg, const ChannelSet& ch) {
  AullspState st;
  // Per-user energy selection: user k keeps its own strongest beams.
  st.delta.resize(cfg.K);
  for (int k = 0; k < cfg.K; ++k) {
    const RVec e = ch.H[k].colwise().squaredNorm().transpose();
    st.delta[k] = SelectionVector::from_support(cfg.M, largest_indices(e, cfg.K_s));
  }
  st.X = matched_filter_coefficients(cfg);
  st.U.resize(cfg.K);
  st.W.resize(cfg.K);
  st.beta.assign(cfg.K, 0.0);
  for (int k = 0; k < cfg.K; ++k) {
    st.U[k] = CMat::Zero(cfg.N_k[k], cfg.D_k[k]);
    st.W[k] = CMat::Identity(cfg.D_k[k], cfg.D_k[k]);
  }
  const MaskedChannelsUser mc = masked_channels_user(ch, st.delta);
  const double s = support_power_user(mc, st.X);
  if (s > 0.0) {
    const double scale = std::sqrt(cfg.P_max / s);
    for (auto& xk : st.X) xk *= scale;
  }
  return st;
}

PrecoderSolution recover_precoder_user(const AullspState& state, const ChannelSet& ch,
                                       const SystemConfig& cfg) {
  const MaskedChannelsUser mc = masked_channels_user(ch, state.delta);
  const double s = support_power_user(mc, state.X);
  if (s <= 0.0)
    throw DegenerateStateError("recover_precoder_user: zero power on the active supports");
  PrecoderSolution sol;
  sol.deltas = state.delta;
  sol.common_support = false;
  sol.X = state.X;
  sol.omega = cfg.P_max / s;
  const double scale = std::sqrt(sol.omega);
  const CMat f_adj = dft_matrix(cfg.M).adjoint();
  sol.P.resize(cfg.K);
  sol.P_ant.resize(cfg.K);
  for (int k = 0; k < cfg.K; ++k) {
    const std::vector<int> sup = state.delta[k].support();
    sol.P[k] = CMat::Zero(cfg.M, cfg.D_k[k]);
    const CMat rows = scale * (mc.Hs[k].adjoint() * state.X[k]);
    for (size_t i = 0; i < sup.size(); ++i) sol.P[k].row(sup[i]) = rows.row(i);
    sol.P_ant[k] = f_adj * sol.P[k];
  }
  return sol;
}

std::pair<PrecoderSolution, SparseTrace> aullsp_solve(const SystemConfig& cfg,
                                                      const ChannelSet& ch,
                                                      const AullspState& init,
                                                      const SparseOptions& opt) {
  cfg.validate();
  check_state(init, cfg);

  AullspState state = init;
  SparseTrace trace;
  double obj_prev = 0.0;
  for (int it = 1; it <= opt.max_iter; ++it) {
    try {
      state.U = update_U_user(state, ch, cfg);
      state.W = update_W_user(state, ch, cfg);
      XUpdateUser xu = update_X_user(state, ch, cfg);
      state.X = std::move(xu.X);
      state.gamma = xu.gamma;

      int hamming = 0;
      if (!opt.freeze_selection) {
        for (int k = 0; k < cfg.K; ++k)
          state.beta[k] = penalty_beta_user(state, ch, cfg, k);
        std::vector<SelectionVector> next(cfg.K);
        for (int k = 0; k < cfg.K; ++k) {
          RVec cost = grad_fk_delta(state, ch, cfg, k);
          if (opt.penalized_selection_gradient)
            cost -= 2.0 * state.beta[k] * state.delta[k].delta.cast<double>();
          next[k] = select_beams(cost, cfg.K_s);
          hamming += state.delta[k].hamming_distance(next[k]);
        }
        state.delta = std::move(next);
      }

      const double obj = wmmse_objective_user(state, ch, cfg);
      const PrecoderSolution sol = recover_precoder_user(state, ch, cfg);
      const double wsr = rate_report(ch, sol.P, cfg).wsr_bits;
      if (!std::isfinite(obj) || !std::isfinite(wsr))
        throw std::runtime_error("aullsp_solve: non-finite objective");
      SparseTraceRow row{it, wsr, obj,
                         state.beta.empty() ? 0.0 : *std::max_element(state.beta.begin(),
                                                                      state.beta.end()),
                         state.gamma, hamming, {}};
      row.active_beams.reserve(cfg.K);
      for (int k = 0; k < cfg.K; ++k) row.active_beams.push_back(state.delta[k].support());
      trace.push_back(std::move(row));
      if (it > 1 && std::abs(obj - obj_prev) < opt.tol * std::max(std::abs(obj_prev), 1e-12))
        break;
      obj_prev = obj;
    } catch (const DegenerateStateError& err) {
      throw DegenerateStateError(std::string(err.what()) + " (iteration " +
                                 std::to_string(it) + ")");
    }
  }
  return {recover_precoder_user(state, ch, cfg), std::move(trace)};
}

}  // namespace beamsparse

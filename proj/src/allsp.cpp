#include "beamsparse/allsp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/QR>
#include <cmath>
#include <stdexcept>

#include "solver_detail.hpp"

namespace beamsparse {

namespace {

// Support-masked channel products shared by the block updates:
// Hs = H(:,S), T_k = H_k diag(delta) H^H = H_k(:,S) Hs^H.
struct MaskedChannels {
  CMat Hs;             // N x K_s
  std::vector<CMat> T; // N_k x N
};

MaskedChannels masked_channels(const ChannelSet& ch, const SelectionVector& delta) {
  MaskedChannels mc;
  const std::vector<int> sup = delta.support();
  mc.Hs = detail::masked_cols(ch.H_all, sup);
  mc.T.resize(ch.H.size());
  for (size_t k = 0; k < ch.H.size(); ++k)
    mc.T[k] = detail::masked_cols(ch.H[k], sup) * mc.Hs.adjoint();
  return mc;
}

double support_power(const CMat& hs, const std::vector<CMat>& x) {
  double s = 0.0;
  for (const auto& xk : x) s += (hs.adjoint() * xk).squaredNorm();
  return s;
}

// Coefficient Gram factor C = H^H [X_1 ... X_K], so H^H (sum X X^H) H = C C^H.
CMat coeff_gram_factor(const ChannelSet& ch, const std::vector<CMat>& x) {
  Eigen::Index d = 0;
  for (const auto& xk : x) d += xk.cols();
  CMat c(ch.H_all.cols(), d);
  Eigen::Index at = 0;
  for (const auto& xk : x) {
    c.middleCols(at, xk.cols()) = ch.H_all.adjoint() * xk;
    at += xk.cols();
  }
  return c;
}

// Pieces of the selection objective
//   f(delta) = delta^T Omega delta - 2 delta . r + mu delta . b
// with Omega = Re{A o B^T}, A the filter statistics, B = H^H (sum X X^H) H,
// r = Re{diag(sum_k alpha_k H^H X_k W_k U_k^H H_k)}, b = diag(B).
struct SelectionObjective {
  RMat omega;
  RVec r;
  RVec b;
  double mu = 0.0;
};

SelectionObjective selection_objective(const AllspState& state, const ChannelSet& ch,
                                       const SystemConfig& cfg) {
  SelectionObjective so;
  const CMat a = detail::filter_stat_matrix(ch, cfg.alpha, state.U, state.W);
  const CMat c = coeff_gram_factor(ch, state.X);
  const CMat b = c * c.adjoint();
  so.omega = a.cwiseProduct(b.transpose()).real();
  so.b = b.diagonal().real();
  so.r = RVec::Zero(cfg.M);
  for (int k = 0; k < cfg.K; ++k)
    so.r += detail::re_diag_cross_user(ch, cfg.alpha[k], state.X[k], state.U[k],
                                       state.W[k], ch.H[k]);
  so.mu = state.mu;
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

}  // namespace

CMat effective_channel(const CMat& h_all, const CMat& h_k, const SelectionVector& delta) {
  if (h_all.cols() != h_k.cols() || delta.M() != h_k.cols())
    throw std::invalid_argument("effective_channel: column counts must agree");
  const std::vector<int> sup = delta.support();
  return detail::masked_cols(h_k, sup) * detail::masked_cols(h_all, sup).adjoint();
}

std::vector<double> effective_noise(const SystemConfig& cfg, const AllspState& state,
                                    const ChannelSet& ch) {
  const CMat hs = detail::masked_cols(ch.H_all, state.delta.support());
  const double s = support_power(hs, state.X);
  std::vector<double> noise(cfg.K);
  for (int k = 0; k < cfg.K; ++k) noise[k] = cfg.sigma2[k] / cfg.P_max * s;
  return noise;
}

std::vector<CMat> update_U(const AllspState& state, const ChannelSet& ch,
                           const SystemConfig& cfg) {
  const MaskedChannels mc = masked_channels(ch, state.delta);
  const double s = support_power(mc.Hs, state.X);
  if (s <= 0.0)
    throw DegenerateStateError("update_U: all coefficients vanished on the support");
  std::vector<CMat> u(cfg.K);
  for (int k = 0; k < cfg.K; ++k) {
    const double noise = cfg.sigma2[k] / cfg.P_max * s;
    CMat cov = noise * CMat::Identity(cfg.N_k[k], cfg.N_k[k]);
    for (int j = 0; j < cfg.K; ++j) {
      const CMat tx = mc.T[k] * state.X[j];
      cov.noalias() += tx * tx.adjoint();
    }
    u[k] = cov.ldlt().solve(mc.T[k] * state.X[k]);
  }
  return u;
}

std::vector<CMat> update_W(const AllspState& state, const ChannelSet& ch,
                           const SystemConfig& cfg) {
  const MaskedChannels mc = masked_channels(ch, state.delta);
  std::vector<CMat> w(cfg.K);
  for (int k = 0; k < cfg.K; ++k) {
    const CMat e = CMat::Identity(cfg.D_k[k], cfg.D_k[k]) -
                   state.U[k].adjoint() * mc.T[k] * state.X[k];
    Eigen::FullPivLU<CMat> lu(e);
    if (!lu.isInvertible())
      throw DegenerateStateError("update_W: singular MSE matrix for user " +
                                 std::to_string(k));
    w[k] = lu.inverse();
    w[k] = 0.5 * (w[k] + w[k].adjoint().eval());
  }
  return w;
}

XUpdate update_X(const AllspState& state, const ChannelSet& ch, const SystemConfig& cfg) {
  const MaskedChannels mc = masked_channels(ch, state.delta);
  XUpdate out;
  out.mu = detail::power_regularizer(cfg, state.U, state.W);

  CMat a = out.mu * (mc.Hs * mc.Hs.adjoint());
  for (int i = 0; i < cfg.K; ++i) {
    const CMat f = mc.T[i].adjoint() * state.U[i];  // N x D_i
    a.noalias() += cfg.alpha[i] * f * state.W[i] * f.adjoint();
  }

  const Eigen::LDLT<CMat> ldlt(a);
  out.X.resize(cfg.K);
  bool bad = false;
  for (int k = 0; k < cfg.K; ++k) {
    const CMat rhs = cfg.alpha[k] * mc.T[k].adjoint() * state.U[k] * state.W[k];
    CMat x = ldlt.solve(rhs);
    const double res_scale = a.norm() * x.norm() + rhs.norm() + 1e-300;
    if (!x.allFinite() || (a * x - rhs).norm() > 1e-9 * res_scale) {
      // Singular normal equations: fall back to the minimum-norm solution.
      x = a.completeOrthogonalDecomposition().solve(rhs);
      if (!x.allFinite()) {
        bad = true;
        break;
      }
    }
    out.X[k] = std::move(x);
  }
  if (bad || out.mu <= 0.0) {
    out.X = matched_filter_coefficients(cfg);
    out.reinitialized = true;
  }
  return out;
}

double penalty_beta(const AllspState& state, const ChannelSet& ch, const SystemConfig& cfg) {
  const SelectionObjective so = selection_objective(state, ch, cfg);
  return std::max(1.1 * gershgorin_max_bound(so.omega), 1e-12);
}

RVec grad_f_delta_at(const AllspState& state, const ChannelSet& ch,
                     const SystemConfig& cfg, const RVec& delta_relaxed) {
  if (delta_relaxed.size() != cfg.M)
    throw std::invalid_argument("grad_f_delta: delta length must be M");
  const SelectionObjective so = selection_objective(state, ch, cfg);
  return 2.0 * (so.omega * delta_relaxed) - 2.0 * so.r + so.mu * so.b;
}

RVec grad_f_delta(const AllspState& state, const ChannelSet& ch, const SystemConfig& cfg) {
  return grad_f_delta_at(state, ch, cfg, state.delta.delta.cast<double>());
}

double eval_f_delta(const AllspState& state, const ChannelSet& ch,
                    const SystemConfig& cfg, const RVec& delta_relaxed) {
  if (delta_relaxed.size() != cfg.M)
    throw std::invalid_argument("eval_f_delta: delta length must be M");
  const SelectionObjective so = selection_objective(state, ch, cfg);
  return delta_relaxed.dot(so.omega * delta_relaxed) - 2.0 * so.r.dot(delta_relaxed) +
         so.mu * so.b.dot(delta_relaxed);
}

double wmmse_objective(const AllspState& state, const ChannelSet& ch,
                       const SystemConfig& cfg) {
  const MaskedChannels mc = masked_channels(ch, state.delta);
  const double s = support_power(mc.Hs, state.X);
  double obj = 0.0;
  for (int k = 0; k < cfg.K; ++k) {
    const double noise = cfg.sigma2[k] / cfg.P_max * s;
    const CMat tx_k = mc.T[k] * state.X[k];
    const CMat d = CMat::Identity(cfg.D_k[k], cfg.D_k[k]) - state.U[k].adjoint() * tx_k;
    CMat e = d * d.adjoint();
    for (int j = 0; j < cfg.K; ++j) {
      if (j == k) continue;
      const CMat tx = mc.T[k] * state.X[j];
      e.noalias() += state.U[k].adjoint() * tx * tx.adjoint() * state.U[k];
    }
    e.noalias() += noise * state.U[k].adjoint() * state.U[k];
    obj += cfg.alpha[k] *
           ((state.W[k] * e).trace().real() - logdet_hermitian(state.W[k]));
  }
  return obj;
}

std::vector<CMat> matched_filter_coefficients(const SystemConfig& cfg) {
  std::vector<CMat> x(cfg.K);
  const int n = cfg.total_rx();
  for (int k = 0; k < cfg.K; ++k) {
    x[k] = CMat::Zero(n, cfg.D_k[k]);
    x[k].block(cfg.rx_offset(k), 0, cfg.N_k[k], cfg.D_k[k]) =
        CMat::Identity(cfg.N_k[k], cfg.D_k[k]);
  }
  return x;
}

AllspState allsp_init(const SystemConfig& cfg, const ChannelSet& ch) {
  AllspState st;
  st.delta = SelectionVector::from_support(
      cfg.M, largest_indices(beam_energies(ch), cfg.K_s));
  st.X = matched_filter_coefficients(cfg);
  st.U.resize(cfg.K);
  st.W.resize(cfg.K);
  for (int k = 0; k < cfg.K; ++k) {
    st.U[k] = CMat::Zero(cfg.N_k[k], cfg.D_k[k]);
    st.W[k] = CMat::Identity(cfg.D_k[k], cfg.D_k[k]);
  }
  // The absorbed objective is scale invariant; normalize anyway so traces
  // start at the power budget.
  const CMat hs = detail::masked_cols(ch.H_all, st.delta.support());
  const double s = support_power(hs, st.X);
  if (s > 0.0) {
    const double scale = std::sqrt(cfg.P_max / s);
    for (auto& xk : st.X) xk *= scale;
  }
  return st;
}

PrecoderSolution recover_precoder(const AllspState& state, const ChannelSet& ch,
                                  const SystemConfig& cfg) {
  const std::vector<int> sup = state.delta.support();
  const CMat hs = detail::masked_cols(ch.H_all, sup);
  const double s = support_power(hs, state.X);
  if (s <= 0.0)
    throw DegenerateStateError("recover_precoder: zero power on the active support");
  PrecoderSolution sol;
  sol.deltas = {state.delta};
  sol.common_support = true;
  sol.X = state.X;
  sol.omega = cfg.P_max / s;
  const double scale = std::sqrt(sol.omega);
  const CMat f_adj = dft_matrix(cfg.M).adjoint();
  sol.P.resize(cfg.K);
  sol.P_ant.resize(cfg.K);
  for (int k = 0; k < cfg.K; ++k) {
    sol.P[k] = CMat::Zero(cfg.M, cfg.D_k[k]);
    const CMat rows = scale * (hs.adjoint() * state.X[k]);  // K_s x D_k
    for (size_t i = 0; i < sup.size(); ++i) sol.P[k].row(sup[i]) = rows.row(i);
    sol.P_ant[k] = f_adj * sol.P[k];
  }
  return sol;
}

std::pair<PrecoderSolution, SparseTrace> allsp_solve(const SystemConfig& cfg,
                                                     const ChannelSet& ch,
                                                     const AllspState& init,
                                                     const SparseOptions& opt) {
  cfg.validate();
  require_common_support_feasible(cfg);
  init.delta.validate();
  if (init.delta.K_s != cfg.K_s)
    throw std::invalid_argument("allsp_solve: init selection must have K_s active beams");

  AllspState state = init;
  SparseTrace trace;
  double obj_prev = 0.0;
  for (int it = 1; it <= opt.max_iter; ++it) {
    try {
      state.U = update_U(state, ch, cfg);
      state.W = update_W(state, ch, cfg);
      XUpdate xu = update_X(state, ch, cfg);
      state.X = std::move(xu.X);
      state.mu = xu.mu;

      int hamming = 0;
      if (!opt.freeze_selection) {
        state.beta = penalty_beta(state, ch, cfg);
        RVec cost = grad_f_delta(state, ch, cfg);
        if (opt.penalized_selection_gradient)
          cost -= 2.0 * state.beta * state.delta.delta.cast<double>();
        SelectionVector next = select_beams(cost, cfg.K_s);
        hamming = state.delta.hamming_distance(next);
        state.delta = std::move(next);
      }

      const double obj = wmmse_objective(state, ch, cfg);
      const PrecoderSolution sol = recover_precoder(state, ch, cfg);
      const double wsr = rate_report(ch, sol.P, cfg).wsr_bits;
      if (!std::isfinite(obj) || !std::isfinite(wsr))
        throw std::runtime_error("allsp_solve: non-finite objective");
      trace.push_back({it, wsr, obj, state.beta, state.mu, hamming,
                       {state.delta.support()}});
      if (it > 1 && std::abs(obj - obj_prev) < opt.tol * std::max(std::abs(obj_prev), 1e-12))
        break;
      obj_prev = obj;
    } catch (const DegenerateStateError& err) {
      throw DegenerateStateError(std::string(err.what()) + " (iteration " +
                                 std::to_string(it) + ")");
    }
  }
  return {recover_precoder(state, ch, cfg), std::move(trace)};
}

}  // namespace beamsparse

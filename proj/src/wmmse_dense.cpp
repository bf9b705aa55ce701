#include "beamsparse/wmmse_dense.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace beamsparse {

double DensePrecoder::power() const {
  double p = 0.0;
  for (const auto& v : V) p += v.squaredNorm();
  return p;
}

DensePrecoder matched_filter_init(const ChannelSet& ch, const SystemConfig& cfg) {
  DensePrecoder mf;
  mf.V.resize(cfg.K);
  for (int k = 0; k < cfg.K; ++k)
    mf.V[k] = ch.H[k].adjoint().leftCols(cfg.D_k[k]);
  const double p = mf.power();
  if (p <= 0.0) throw DegenerateStateError("matched_filter_init: zero channel");
  const double scale = std::sqrt(cfg.P_max / p);
  for (auto& v : mf.V) v *= scale;
  return mf;
}

namespace {

// Reduced-channel WMMSE iteration state. All matrices live in the
// support-compressed coordinates (precoders are K_s x D_k).
struct ReducedProblem {
  std::vector<CMat> Hs;  // N_k x K_s
  std::vector<CMat> Vs;  // K_s x D_k
};

double reduced_power(const std::vector<CMat>& vs) {
  double p = 0.0;
  for (const auto& v : vs) p += v.squaredNorm();
  return p;
}

// WSR of the rescaled iterate, evaluated on the reduced channels (identical
// to the full-channel value because off-support precoder rows are zero).
double reduced_wsr(const ReducedProblem& rp, const SystemConfig& cfg, double omega) {
  std::vector<CMat> scaled(rp.Vs.size());
  for (size_t k = 0; k < rp.Vs.size(); ++k) scaled[k] = std::sqrt(omega) * rp.Vs[k];
  std::vector<double> rates(cfg.K);
  for (int k = 0; k < cfg.K; ++k)
    rates[k] = user_rate(rp.Hs[k], scaled, k, cfg.sigma2[k]);
  return weighted_sum(rates, cfg.alpha);
}

}  // namespace

std::pair<DensePrecoder, DenseTrace> wmmse_on_support(
    const SystemConfig& cfg, const ChannelSet& ch, const std::vector<int>& support,
    const DensePrecoder& init, int max_iter, double tol) {
  cfg.validate();
  if (tol <= 0.0) throw std::invalid_argument("wmmse_on_support: tol must be positive");
  const int ks = static_cast<int>(support.size());
  if (ks < cfg.total_streams())
    throw std::invalid_argument("wmmse_on_support: support smaller than stream count");

  ReducedProblem rp;
  rp.Hs.resize(cfg.K);
  rp.Vs.resize(cfg.K);
  for (int k = 0; k < cfg.K; ++k) {
    rp.Hs[k].resize(cfg.N_k[k], ks);
    for (int i = 0; i < ks; ++i) rp.Hs[k].col(i) = ch.H[k].col(support[i]);
    rp.Vs[k].resize(ks, cfg.D_k[k]);
    for (int i = 0; i < ks; ++i) rp.Vs[k].row(i) = init.V[k].row(support[i]);
  }
  if (reduced_power(rp.Vs) <= 0.0)
    throw DegenerateStateError("wmmse_on_support: initial precoder has no power on support");

  std::vector<CMat> U(cfg.K), W(cfg.K);
  DenseTrace trace;
  double prev_wsr = 0.0;
  double omega = 1.0;

  for (int it = 1; it <= max_iter; ++it) {
    const double pow_now = reduced_power(rp.Vs);
    // Receive filters and MSE weights under the effective noise.
    for (int k = 0; k < cfg.K; ++k) {
      const double noise = cfg.sigma2[k] / cfg.P_max * pow_now;
      CMat cov = noise * CMat::Identity(cfg.N_k[k], cfg.N_k[k]);
      for (int j = 0; j < cfg.K; ++j) {
        const CMat hv = rp.Hs[k] * rp.Vs[j];
        cov.noalias() += hv * hv.adjoint();
      }
      U[k] = cov.ldlt().solve(rp.Hs[k] * rp.Vs[k]);
      CMat e = CMat::Identity(cfg.D_k[k], cfg.D_k[k]) - U[k].adjoint() * rp.Hs[k] * rp.Vs[k];
      W[k] = e.partialPivLu().inverse();
      W[k] = 0.5 * (W[k] + W[k].adjoint().eval());
    }

    double mu = 0.0;
    for (int k = 0; k < cfg.K; ++k)
      mu += cfg.sigma2[k] / cfg.P_max * cfg.alpha[k] * (U[k] * W[k] * U[k].adjoint()).trace().real();

    CMat a = mu * CMat::Identity(ks, ks);
    for (int k = 0; k < cfg.K; ++k) {
      const CMat hu = rp.Hs[k].adjoint() * U[k];  // K_s x D_k
      a.noalias() += cfg.alpha[k] * hu * W[k] * hu.adjoint();
    }
    const Eigen::PartialPivLU<CMat> lu(a);
    for (int k = 0; k < cfg.K; ++k)
      rp.Vs[k] = lu.solve(cfg.alpha[k] * rp.Hs[k].adjoint() * U[k] * W[k]);

    const double pow_new = reduced_power(rp.Vs);
    if (pow_new <= 0.0)
      throw DegenerateStateError("wmmse_on_support: precoder collapsed to zero");
    omega = cfg.P_max / pow_new;
    const double wsr = reduced_wsr(rp, cfg, omega);
    if (!std::isfinite(wsr))
      throw std::runtime_error("wmmse_on_support: non-finite WSR at iteration " +
                               std::to_string(it));
    trace.push_back({it, wsr, cfg.P_max});
    if (it > 1 && std::abs(wsr - prev_wsr) < tol * std::max(std::abs(prev_wsr), 1e-12))
      break;
    prev_wsr = wsr;
  }

  DensePrecoder out;
  out.V.resize(cfg.K);
  const double scale = std::sqrt(omega);
  for (int k = 0; k < cfg.K; ++k) {
    out.V[k] = CMat::Zero(cfg.M, cfg.D_k[k]);
    for (int i = 0; i < ks; ++i) out.V[k].row(support[i]) = scale * rp.Vs[k].row(i);
  }
  return {std::move(out), std::move(trace)};
}

std::pair<DensePrecoder, DenseTrace> dense_wmmse_solve(const SystemConfig& cfg,
                                                       const ChannelSet& ch,
                                                       const DensePrecoder& init,
                                                       int max_iter, double tol) {
  std::vector<int> all(cfg.M);
  std::iota(all.begin(), all.end(), 0);
  return wmmse_on_support(cfg, ch, all, init, max_iter, tol);
}

PrecoderSolution solution_from_dense(const DensePrecoder& dense,
                                     const std::vector<int>& support) {
  PrecoderSolution sol;
  const int m = static_cast<int>(dense.V.front().rows());
  sol.deltas.assign(dense.V.size(), SelectionVector::from_support(m, support));
  sol.common_support = true;
  sol.omega = 1.0;
  sol.P = dense.V;
  sol.P_ant.resize(dense.V.size());
  const CMat f_adj = dft_matrix(m).adjoint();
  for (size_t k = 0; k < dense.V.size(); ++k) sol.P_ant[k] = f_adj * dense.V[k];
  return sol;
}

PrecoderSolution greedy_energy_select_then_wmmse(const SystemConfig& cfg,
                                                 const ChannelSet& ch, int max_iter,
                                                 double tol) {
  require_common_support_feasible(cfg);
  const std::vector<int> support = largest_indices(beam_energies(ch), cfg.K_s);
  const auto [dense, trace] =
      wmmse_on_support(cfg, ch, support, matched_filter_init(ch, cfg), max_iter, tol);
  (void)trace;
  return solution_from_dense(dense, support);
}

}  // namespace beamsparse

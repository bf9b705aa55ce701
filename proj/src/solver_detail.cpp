#include "solver_detail.hpp"

namespace beamsparse::detail {

CMat filter_stat_matrix(const ChannelSet& ch, const std::vector<double>& alpha,
                        const std::vector<CMat>& U, const std::vector<CMat>& W) {
  const Eigen::Index m = ch.H_all.cols();
  CMat a = CMat::Zero(m, m);
  for (size_t k = 0; k < U.size(); ++k) {
    const CMat hu = ch.H[k].adjoint() * U[k];  // M x D_k
    a.noalias() += alpha[k] * hu * W[k] * hu.adjoint();
  }
  return a;
}

double power_regularizer(const SystemConfig& cfg, const std::vector<CMat>& U,
                         const std::vector<CMat>& W) {
  double mu = 0.0;
  for (int k = 0; k < cfg.K; ++k)
    mu += cfg.sigma2[k] / cfg.P_max * cfg.alpha[k] *
          (W[k] * (U[k].adjoint() * U[k])).trace().real();
  return mu;
}

RVec re_diag_cross_user(const ChannelSet& ch, double alpha, const CMat& x,
                        const CMat& u, const CMat& w, const CMat& h_k) {
  // diag of (H^H X)(W U^H H_k) without forming the M x M product.
  const CMat left = ch.H_all.adjoint() * x;   // M x D_k
  const CMat right = w * u.adjoint() * h_k;   // D_k x M
  return alpha * (left.transpose().cwiseProduct(right)).colwise().sum().real().transpose();
}

}  // namespace beamsparse::detail

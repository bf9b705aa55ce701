#include "beamsparse/rate.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

namespace beamsparse {

double logdet_hermitian(const CMat& a) {
  Eigen::LLT<CMat> llt(a);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("logdet_hermitian: matrix not positive definite");
  double acc = 0.0;
  const auto& l = llt.matrixLLT();
  for (Eigen::Index i = 0; i < a.rows(); ++i) acc += std::log(l(i, i).real());
  return 2.0 * acc;
}

double user_rate(const CMat& h_k, const std::vector<CMat>& precoders, int user,
                 double sigma2) {
  if (user < 0 || user >= static_cast<int>(precoders.size()))
    throw std::invalid_argument("user_rate: user index out of range");
  if (sigma2 <= 0.0) throw std::invalid_argument("user_rate: sigma2 must be positive");
  const Eigen::Index n_k = h_k.rows();
  CMat interference = sigma2 * CMat::Identity(n_k, n_k);
  for (int j = 0; j < static_cast<int>(precoders.size()); ++j) {
    if (precoders[j].rows() != h_k.cols())
      throw std::invalid_argument("user_rate: precoder row count must equal beam count");
    if (j == user) continue;
    const CMat hp = h_k * precoders[j];
    interference.noalias() += hp * hp.adjoint();
  }
  const CMat hp_k = h_k * precoders[user];
  const CMat total = interference + hp_k * hp_k.adjoint();
  const double nats = logdet_hermitian(total) - logdet_hermitian(interference);
  return std::max(0.0, nats / std::log(2.0));
}

double weighted_sum(const std::vector<double>& rates, const std::vector<double>& alpha) {
  if (rates.size() != alpha.size())
    throw std::invalid_argument("weighted_sum: length mismatch");
  double acc = 0.0;
  for (size_t k = 0; k < rates.size(); ++k) acc += alpha[k] * rates[k];
  return acc;
}

RateReport rate_report(const ChannelSet& ch, const std::vector<CMat>& precoders,
                       const SystemConfig& cfg) {
  return rate_report(ch, precoders, cfg, cfg.sigma2);
}

RateReport rate_report(const ChannelSet& ch, const std::vector<CMat>& precoders,
                       const SystemConfig& cfg, const std::vector<double>& sigma2) {
  RateReport rep;
  rep.rates_bits.resize(cfg.K);
  for (int k = 0; k < cfg.K; ++k)
    rep.rates_bits[k] = user_rate(ch.H[k], precoders, k, sigma2[k]);
  rep.wsr_bits = weighted_sum(rep.rates_bits, cfg.alpha);
  return rep;
}

}  // namespace beamsparse

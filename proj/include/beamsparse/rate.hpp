/**
 * @file rate.hpp
 * @brief Achievable-rate and weighted-sum-rate evaluation shared by all
 * solvers. Rates are reported in bits per channel use.
 */
#pragma once

#include "beamsparse/channel.hpp"

namespace beamsparse {

struct RateReport {
  std::vector<double> rates_bits;
  double wsr_bits = 0.0;
};

/// log(det(A)) of a Hermitian positive definite matrix, natural log.
double logdet_hermitian(const CMat& a);

/// Rate of `user` under angle-domain precoders `precoders` (one M x D_k block
/// per user), interference treated as noise:
///   log2 det(I + H_k P_k P_k^H H_k^H (sum_{j!=k} H_k P_j P_j^H H_k^H + sigma2 I)^-1).
double user_rate(const CMat& h_k, const std::vector<CMat>& precoders, int user,
                 double sigma2);

/// sum_k alpha_k r_k.
double weighted_sum(const std::vector<double>& rates, const std::vector<double>& alpha);

RateReport rate_report(const ChannelSet& ch, const std::vector<CMat>& precoders,
                       const SystemConfig& cfg);

/// Rate report with explicit noise variances (used when sweeping SNR without
/// rebuilding the config).
RateReport rate_report(const ChannelSet& ch, const std::vector<CMat>& precoders,
                       const SystemConfig& cfg, const std::vector<double>& sigma2);

}  // namespace beamsparse

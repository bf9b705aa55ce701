/**
 * @file channel.hpp
 * @brief Scenario configuration, synthetic multipath channel generation and
 * the unitary angle-domain (DFT) transform.
 */
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace beamsparse {

using Complex = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using IVec = Eigen::VectorXi;

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }

/// Raised when a solver reaches a state where its linear systems are singular
/// (e.g. all coefficients vanished on the active support).
struct DegenerateStateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Dimensions, powers and budgets of one downlink scenario.
/// Beam count M, user count K, per-user receive antennas N_k and stream
/// counts D_k, total power P_max, per-user noise variances sigma2 (linear,
/// per receive antenna) and rate weights alpha, active-beam budget K_s.
struct SystemConfig {
  int M = 0;
  int K = 0;
  std::vector<int> N_k;
  std::vector<int> D_k;
  double P_max = 1.0;
  std::vector<double> sigma2;
  std::vector<double> alpha;
  int K_s = 0;
  std::uint64_t seed = 1;

  int total_streams() const;  // D = sum D_k
  int total_rx() const;       // N = sum N_k
  int rx_offset(int k) const; // row offset of user k's block in the stacked channel

  /// Throws std::invalid_argument on inconsistent dimensions, non-positive
  /// powers/variances, negative weights, D > N, N > M, K_s out of [1, M] or
  /// K_s < max_k D_k.
  void validate() const;

  /// Convenience constructor for homogeneous scenarios.
  static SystemConfig uniform(int M, int K, int N_per_user, int D_per_user,
                              double P_max, double sigma2, int K_s,
                              std::uint64_t seed);
};

/// Common-support solvers additionally need K_s >= D; throws otherwise.
void require_common_support_feasible(const SystemConfig& cfg);

struct ChannelMeta {
  int paths = 0;
  double angle_spread_rad = 0.0;
  double sector_halfwidth_rad = 0.0;
  double spacing = 0.5;  // element spacing in wavelengths
};

/// Per-user antenna-domain channels H_ant[k] (N_k x M), their angle-domain
/// counterparts H[k] = H_ant[k] F^H, and the N x M vertical stack H_all.
struct ChannelSet {
  std::vector<CMat> H_ant;
  std::vector<CMat> H;
  CMat H_all;
  ChannelMeta meta;
};

/// Uniform-linear-array steering vector: entry m is
/// exp(j 2*pi*spacing*m*sin(theta)) / sqrt(M). Unit Euclidean norm.
CVec steering_vector(int m_antennas, double theta_rad, double spacing_wavelengths);

/// Unitary M-point DFT matrix, F(p,q) = exp(-j 2*pi*p*q/M)/sqrt(M).
CMat dft_matrix(int m);

/// Angle-domain transform H = H_ant F^H. Preserves the Frobenius norm.
CMat to_angle_domain(const CMat& h_ant);

/// Geometric ray-based channel: per user, `paths` rays with complex Gaussian
/// gains, transmit angles clustered around a per-user center drawn uniformly
/// in a 120 degree sector, receive angles independent. Deterministic in
/// cfg.seed.
ChannelSet synth_channel(const SystemConfig& cfg, int paths = 6,
                         double angle_spread_rad = deg2rad(5.0));

/// Rebuilds the angle-domain members from H_ant (used by the file loader).
void derive_angle_domain(ChannelSet& ch);

/// Per-user noise variances for a given SNR, with SNR = P_max / sigma^2
/// (total transmit power over per-receive-antenna noise).
std::vector<double> noise_from_snr(const SystemConfig& cfg, double snr_db);

/// Aggregate per-beam channel energy: entry i is sum_k ||column i of H[k]||^2.
RVec beam_energies(const ChannelSet& ch);

/// Fraction of total angle-domain energy carried by the `top` strongest beams.
double beam_energy_fraction(const ChannelSet& ch, int top);

/// Text export: header line with dimensions, then one line per receive
/// antenna holding M "re,im" pairs of the antenna-domain channel.
void save_channel(const ChannelSet& ch, const std::string& path);

/// Inverse of save_channel; recomputes the angle-domain members.
/// Throws std::runtime_error on I/O or format errors.
ChannelSet load_channel(const std::string& path);

}  // namespace beamsparse

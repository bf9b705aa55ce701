#include "beamsparse/channel.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "beamsparse/rng.hpp"

namespace beamsparse {

int SystemConfig::total_streams() const {
  return std::accumulate(D_k.begin(), D_k.end(), 0);
}

int SystemConfig::total_rx() const {
  return std::accumulate(N_k.begin(), N_k.end(), 0);
}

int SystemConfig::rx_offset(int k) const {
  return std::accumulate(N_k.begin(), N_k.begin() + k, 0);
}

void SystemConfig::validate() const {
  if (M < 1) throw std::invalid_argument("SystemConfig: M must be >= 1");
  if (K < 1) throw std::invalid_argument("SystemConfig: K must be >= 1");
  if (static_cast<int>(N_k.size()) != K || static_cast<int>(D_k.size()) != K ||
      static_cast<int>(sigma2.size()) != K || static_cast<int>(alpha.size()) != K)
    throw std::invalid_argument("SystemConfig: per-user vectors must have length K");
  int max_dk = 0;
  for (int k = 0; k < K; ++k) {
    if (N_k[k] < 1 || D_k[k] < 1)
      throw std::invalid_argument("SystemConfig: N_k and D_k must be >= 1");
    if (D_k[k] > N_k[k])
      throw std::invalid_argument("SystemConfig: D_k must not exceed N_k");
    if (sigma2[k] <= 0.0)
      throw std::invalid_argument("SystemConfig: sigma2 must be strictly positive");
    if (alpha[k] < 0.0)
      throw std::invalid_argument("SystemConfig: alpha must be nonnegative");
    max_dk = std::max(max_dk, D_k[k]);
  }
  if (P_max <= 0.0)
    throw std::invalid_argument("SystemConfig: P_max must be strictly positive");
  const int n = total_rx();
  const int d = total_streams();
  if (d > n) throw std::invalid_argument("SystemConfig: require D <= N");
  if (n > M) throw std::invalid_argument("SystemConfig: require N <= M");
  if (K_s < 1 || K_s > M)
    throw std::invalid_argument("SystemConfig: require 1 <= K_s <= M");
  if (K_s < max_dk)
    throw std::invalid_argument("SystemConfig: K_s below the largest per-user stream count");
}

SystemConfig SystemConfig::uniform(int M, int K, int N_per_user, int D_per_user,
                                   double P_max, double sigma2, int K_s,
                                   std::uint64_t seed) {
  SystemConfig cfg;
  cfg.M = M;
  cfg.K = K;
  cfg.N_k.assign(K, N_per_user);
  cfg.D_k.assign(K, D_per_user);
  cfg.P_max = P_max;
  cfg.sigma2.assign(K, sigma2);
  cfg.alpha.assign(K, 1.0);
  cfg.K_s = K_s;
  cfg.seed = seed;
  cfg.validate();
  return cfg;
}

void require_common_support_feasible(const SystemConfig& cfg) {
  if (cfg.K_s < cfg.total_streams())
    throw std::invalid_argument(
        "common-support solver needs K_s >= total stream count D");
}

CVec steering_vector(int m_antennas, double theta_rad, double spacing_wavelengths) {
  if (m_antennas < 1) throw std::invalid_argument("steering_vector: M >= 1");
  if (spacing_wavelengths <= 0.0)
    throw std::invalid_argument("steering_vector: spacing must be positive");
  CVec a(m_antennas);
  const double phase_step = 2.0 * kPi * spacing_wavelengths * std::sin(theta_rad);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m_antennas));
  for (int m = 0; m < m_antennas; ++m)
    a(m) = std::polar(scale, phase_step * static_cast<double>(m));
  return a;
}

CMat dft_matrix(int m) {
  CMat f(m, m);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (int p = 0; p < m; ++p)
    for (int q = 0; q < m; ++q)
      f(p, q) = std::polar(scale, -2.0 * kPi * p * q / static_cast<double>(m));
  return f;
}

CMat to_angle_domain(const CMat& h_ant) {
  return h_ant * dft_matrix(static_cast<int>(h_ant.cols())).adjoint();
}

void derive_angle_domain(ChannelSet& ch) {
  const int k_users = static_cast<int>(ch.H_ant.size());
  if (k_users == 0) throw std::invalid_argument("derive_angle_domain: empty channel set");
  const int m = static_cast<int>(ch.H_ant.front().cols());
  const CMat f_adj = dft_matrix(m).adjoint();
  ch.H.resize(k_users);
  int n_total = 0;
  for (int k = 0; k < k_users; ++k) {
    if (ch.H_ant[k].cols() != m)
      throw std::invalid_argument("derive_angle_domain: inconsistent column counts");
    ch.H[k] = ch.H_ant[k] * f_adj;
    n_total += static_cast<int>(ch.H[k].rows());
  }
  ch.H_all.resize(n_total, m);
  int row = 0;
  for (int k = 0; k < k_users; ++k) {
    ch.H_all.middleRows(row, ch.H[k].rows()) = ch.H[k];
    row += static_cast<int>(ch.H[k].rows());
  }
}

ChannelSet synth_channel(const SystemConfig& cfg, int paths, double angle_spread_rad) {
  cfg.validate();
  if (paths < 1) throw std::invalid_argument("synth_channel: path count must be >= 1");

  constexpr double kSpacing = 0.5;
  const double sector_halfwidth = deg2rad(60.0);  // users drop in a 120 degree sector

  ChannelSet ch;
  ch.meta = {paths, angle_spread_rad, sector_halfwidth, kSpacing};
  ch.H_ant.resize(cfg.K);

  Rng rng(cfg.seed);
  const double gain_var = 1.0 / static_cast<double>(paths);  // unit pathloss per user
  for (int k = 0; k < cfg.K; ++k) {
    CMat h = CMat::Zero(cfg.N_k[k], cfg.M);
    const double center = rng.uniform(-sector_halfwidth, sector_halfwidth);
    for (int l = 0; l < paths; ++l) {
      const double theta_tx = center + rng.uniform(-angle_spread_rad, angle_spread_rad);
      const double theta_rx = rng.uniform(-sector_halfwidth, sector_halfwidth);
      const Complex gain = rng.cnormal(gain_var);
      const CVec b = steering_vector(cfg.N_k[k], theta_rx, kSpacing);
      const CVec a = steering_vector(cfg.M, theta_tx, kSpacing);
      h.noalias() += gain * b * a.adjoint();
    }
    ch.H_ant[k] = std::move(h);
  }
  derive_angle_domain(ch);
  return ch;
}

std::vector<double> noise_from_snr(const SystemConfig& cfg, double snr_db) {
  const double sigma2 = cfg.P_max / std::pow(10.0, snr_db / 10.0);
  return std::vector<double>(cfg.K, sigma2);
}

RVec beam_energies(const ChannelSet& ch) {
  return ch.H_all.colwise().squaredNorm().transpose();
}

double beam_energy_fraction(const ChannelSet& ch, int top) {
  RVec e = beam_energies(ch);
  const double total = e.sum();
  if (total <= 0.0) return 0.0;
  std::sort(e.begin(), e.end(), std::greater<double>());
  return e.head(top).sum() / total;
}

void save_channel(const ChannelSet& ch, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_channel: cannot open " + path);
  const int k_users = static_cast<int>(ch.H_ant.size());
  const int m = static_cast<int>(ch.H_ant.front().cols());
  out << "beamsparse-channel " << m << ' ' << k_users;
  for (const auto& h : ch.H_ant) out << ' ' << h.rows();
  out << '\n';
  char buf[64];
  for (const auto& h : ch.H_ant) {
    for (Eigen::Index r = 0; r < h.rows(); ++r) {
      for (Eigen::Index c = 0; c < h.cols(); ++c) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g", h(r, c).real(), h(r, c).imag());
        out << buf << (c + 1 == h.cols() ? "" : " ");
      }
      out << '\n';
    }
  }
  if (!out) throw std::runtime_error("save_channel: write failed for " + path);
}

ChannelSet load_channel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_channel: cannot open " + path);
  std::string magic;
  int m = 0, k_users = 0;
  in >> magic >> m >> k_users;
  if (magic != "beamsparse-channel" || m < 1 || k_users < 1)
    throw std::runtime_error("load_channel: bad header in " + path);
  std::vector<int> rows(k_users);
  for (int& r : rows) {
    in >> r;
    if (!in || r < 1) throw std::runtime_error("load_channel: bad header in " + path);
  }
  ChannelSet ch;
  ch.H_ant.resize(k_users);
  for (int k = 0; k < k_users; ++k) {
    CMat h(rows[k], m);
    for (int r = 0; r < rows[k]; ++r)
      for (int c = 0; c < m; ++c) {
        std::string tok;
        in >> tok;
        double re = 0, im = 0;
        if (!in || std::sscanf(tok.c_str(), "%lg,%lg", &re, &im) != 2)
          throw std::runtime_error("load_channel: malformed entry in " + path);
        h(r, c) = Complex(re, im);
      }
    ch.H_ant[k] = std::move(h);
  }
  derive_angle_domain(ch);
  return ch;
}

}  // namespace beamsparse

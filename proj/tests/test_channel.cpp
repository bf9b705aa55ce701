#include <cmath>
#include <filesystem>

#include "beamsparse/channel.hpp"
#include "doctest.h"

using namespace beamsparse;

TEST_CASE("steering vector basics") {
  // Single antenna is the trivial unit scalar.
  const CVec a1 = steering_vector(1, 0.7, 0.5);
  CHECK(a1.size() == 1);
  CHECK(std::abs(a1(0) - Complex(1.0, 0.0)) < 1e-15);

  // Broadside: all phases zero, entries 1/sqrt(M).
  const CVec a4 = steering_vector(4, 0.0, 0.5);
  for (int m = 0; m < 4; ++m) CHECK(std::abs(a4(m) - Complex(0.5, 0.0)) < 1e-15);

  // Constant phase increment 2*pi*spacing*sin(theta) and unit norm.
  const double theta = kPi / 6.0;
  const CVec a8 = steering_vector(8, theta, 0.5);
  CHECK(a8.norm() == doctest::Approx(1.0).epsilon(1e-14));
  const double expected_step = 2.0 * kPi * 0.5 * std::sin(theta);
  for (int m = 0; m + 1 < 8; ++m) {
    const double step = std::arg(a8(m + 1) / a8(m));
    CHECK(step == doctest::Approx(expected_step).epsilon(1e-12));
  }
  CHECK(expected_step == doctest::Approx(kPi / 2.0 * std::sin(kPi / 6.0) * 2.0));

  CHECK_THROWS_AS(steering_vector(0, 0.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(steering_vector(4, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("angle-domain transform is unitary") {
  // 1x1 passes through unchanged.
  CMat one(1, 1);
  one(0, 0) = Complex(0.3, -0.2);
  CHECK((to_angle_domain(one) - one).norm() < 1e-15);

  // A steering vector on the DFT grid maps to a scaled basis row.
  const int m = 8;
  const int grid_bin = 3;
  const double theta = std::asin(2.0 * grid_bin / m);  // spacing 0.5: sin = bin/(0.5*M)
  CMat row(1, m);
  row.row(0) = steering_vector(m, theta, 0.5).adjoint();
  const CMat angle = to_angle_domain(row);
  for (int q = 0; q < m; ++q) {
    const double mag = std::abs(angle(0, q));
    if (q == grid_bin)
      CHECK(mag == doctest::Approx(1.0).epsilon(1e-12));
    else
      CHECK(mag < 1e-12);
  }

  // Frobenius norm preserved on a random matrix.
  SystemConfig cfg = SystemConfig::uniform(8, 1, 2, 2, 1.0, 1.0, 4, 99);
  const ChannelSet ch = synth_channel(cfg);
  CHECK(ch.H[0].norm() == doctest::Approx(ch.H_ant[0].norm()).epsilon(1e-12));
}

TEST_CASE("dft matrix is unitary") {
  const CMat f = dft_matrix(16);
  CHECK((f * f.adjoint() - CMat::Identity(16, 16)).norm() < 1e-12);
}

TEST_CASE("synthetic channel determinism and stacking") {
  SystemConfig cfg = SystemConfig::uniform(16, 2, 2, 2, 1.0, 0.1, 8, 1234);
  const ChannelSet a = synth_channel(cfg);
  const ChannelSet b = synth_channel(cfg);
  for (int k = 0; k < cfg.K; ++k) {
    CHECK((a.H_ant[k] - b.H_ant[k]).norm() == 0.0);  // bit-for-bit
    CHECK((a.H[k] - b.H[k]).norm() == 0.0);
  }
  // Stacked rows match the per-user blocks.
  CHECK((a.H_all.topRows(2) - a.H[0]).norm() == 0.0);
  CHECK((a.H_all.bottomRows(2) - a.H[1]).norm() == 0.0);

  SystemConfig cfg2 = cfg;
  cfg2.seed = 1235;
  const ChannelSet c = synth_channel(cfg2);
  CHECK((a.H_ant[0] - c.H_ant[0]).norm() > 1e-9);  // different seeds differ

  CHECK_THROWS_AS(synth_channel(cfg, 0), std::invalid_argument);
}

TEST_CASE("single on-grid path concentrates in one beam") {
  // One path, transmit angle forced onto the DFT grid via a fixed seed scan:
  // instead of steering the RNG, build the channel directly.
  const int m = 8;
  const double theta = std::asin(2.0 / m);  // grid bin 1
  CMat h_ant(1, m);
  h_ant.row(0) = steering_vector(m, theta, 0.5).adjoint();
  ChannelSet ch;
  ch.H_ant = {h_ant};
  derive_angle_domain(ch);
  const RVec e = beam_energies(ch);
  CHECK(e(1) / e.sum() > 0.99);
  // All antenna-domain entries have equal magnitude.
  for (int i = 0; i < m; ++i)
    CHECK(std::abs(h_ant(0, i)) == doctest::Approx(1.0 / std::sqrt(double(m))));
}

TEST_CASE("angle-domain energy concentration, M=64 gate") {
  SystemConfig cfg = SystemConfig::uniform(64, 4, 2, 2, 1.0, 0.1, 32, 0);
  int ok_half = 0;
  const int seeds = 20;
  double top16_sum = 0.0;
  for (int s = 0; s < seeds; ++s) {
    cfg.seed = 100 + s;
    const ChannelSet ch = synth_channel(cfg, 6, deg2rad(5.0));
    if (beam_energy_fraction(ch, 32) >= 0.85) ++ok_half;
    top16_sum += beam_energy_fraction(ch, 16);
  }
  CHECK(ok_half == seeds);                 // K_s = M/2 captures >= 85% on every seed
  CHECK(top16_sum / seeds > 0.9);          // top quarter carries most of the energy
}

TEST_CASE("noise from SNR convention") {
  SystemConfig cfg = SystemConfig::uniform(8, 2, 1, 1, 1.0, 1.0, 4, 7);
  CHECK(noise_from_snr(cfg, 0.0)[0] == doctest::Approx(1.0));
  CHECK(noise_from_snr(cfg, 10.0)[1] == doctest::Approx(0.1));
  cfg.P_max = 16.0;
  CHECK(noise_from_snr(cfg, 18.0)[0] == doctest::Approx(16.0 / std::pow(10.0, 1.8)));
  CHECK(noise_from_snr(cfg, 18.0)[0] == doctest::Approx(0.2537).epsilon(1e-3));
}

TEST_CASE("channel file round trip") {
  SystemConfig cfg = SystemConfig::uniform(8, 2, 2, 1, 1.0, 0.1, 4, 42);
  const ChannelSet ch = synth_channel(cfg);
  const std::string path =
      (std::filesystem::temp_directory_path() / "beamsparse_chan_test.txt").string();
  save_channel(ch, path);
  const ChannelSet back = load_channel(path);
  for (int k = 0; k < cfg.K; ++k) {
    CHECK((ch.H_ant[k] - back.H_ant[k]).norm() == 0.0);  // 17 digits round-trip exactly
    CHECK((ch.H[k] - back.H[k]).norm() == 0.0);
  }
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_channel("/nonexistent/beamsparse.txt"), std::runtime_error);
}

TEST_CASE("config validation") {
  // K_s below the largest per-user stream count is rejected outright.
  CHECK_THROWS_AS(SystemConfig::uniform(4, 2, 2, 2, 1.0, 0.1, 1, 1), std::invalid_argument);
  SystemConfig bad = SystemConfig::uniform(8, 2, 2, 2, 1.0, 0.1, 4, 1);
  bad.P_max = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  SystemConfig worse = SystemConfig::uniform(8, 2, 2, 2, 1.0, 0.1, 4, 1);
  worse.K_s = 0;
  CHECK_THROWS_AS(worse.validate(), std::invalid_argument);
  SystemConfig ks1 = SystemConfig::uniform(8, 2, 1, 1, 1.0, 0.1, 1, 1);
  CHECK_NOTHROW(ks1.validate());  // per-user feasible even though K_s < D
  CHECK_THROWS_AS(require_common_support_feasible(ks1), std::invalid_argument);
}

#include <algorithm>
#include <cmath>
#include <map>

#include "beamsparse/allsp.hpp"
#include "beamsparse/aullsp.hpp"
#include "beamsparse/oracle.hpp"
#include "beamsparse/wmmse_dense.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace beamsparse;
using testsupport::random_cmat;

namespace {

SystemConfig tiny_cfg(int m, int k_s, std::uint64_t seed) {
  SystemConfig cfg = SystemConfig::uniform(m, 2, 1, 1, 1.0, 1.0, k_s, seed);
  cfg.sigma2 = noise_from_snr(cfg, 10.0);
  return cfg;
}

/// Random precoders supported on the given per-user selections, scaled to a
/// total power of `power`.
std::vector<CMat> random_supported_precoders(const SystemConfig& cfg, Rng& rng,
                                             const std::vector<SelectionVector>& deltas,
                                             double power) {
  std::vector<CMat> p(cfg.K);
  double total = 0.0;
  for (int k = 0; k < cfg.K; ++k) {
    const SelectionVector& d = deltas.size() == 1 ? deltas.front() : deltas[k];
    p[k] = CMat::Zero(cfg.M, cfg.D_k[k]);
    for (int i : d.support())
      for (int j = 0; j < cfg.D_k[k]; ++j) p[k](i, j) = rng.cnormal();
    total += p[k].squaredNorm();
  }
  const double scale = std::sqrt(power / total);
  for (auto& pk : p) pk *= scale;
  return p;
}

}  // namespace

TEST_CASE("support enumeration sizes and budget") {
  CHECK(binomial(4, 2) == 6);
  CHECK(enumerate_subsets(4, 2).size() == 6);
  CHECK(enumerate_subsets(4, 2).front() == std::vector<int>{0, 1});
  CHECK(enumerate_subsets(4, 2).back() == std::vector<int>{2, 3});

  SystemConfig cfg = tiny_cfg(4, 2, 1);
  const ChannelSet ch = synth_channel(cfg);
  const OracleResult res = exhaustive_beam_search(cfg, ch);
  CHECK(res.table.size() == 6);

  // Budget guard: C(16, 8) = 12870 > 10000.
  SystemConfig big = SystemConfig::uniform(16, 2, 1, 1, 1.0, 1.0, 8, 1);
  const ChannelSet chb = synth_channel(big);
  CHECK_THROWS_AS(exhaustive_beam_search(big, chb), std::invalid_argument);
}

TEST_CASE("full-support enumeration equals the dense solve") {
  SystemConfig cfg = tiny_cfg(4, 4, 2);
  const ChannelSet ch = synth_channel(cfg);
  const OracleResult res = exhaustive_beam_search(cfg, ch);
  CHECK(res.table.size() == 1);
  const auto [dense, trace] =
      dense_wmmse_solve(cfg, ch, matched_filter_init(ch, cfg), 200, 1e-8);
  CHECK(res.best.wsr_bits ==
        doctest::Approx(rate_report(ch, dense.V, cfg).wsr_bits).epsilon(1e-9));
}

TEST_CASE("oracle monotonicity and greedy bound") {
  for (std::uint64_t seed : {3u, 4u}) {
    SystemConfig cfg2 = tiny_cfg(6, 2, seed);
    SystemConfig cfg3 = tiny_cfg(6, 3, seed);
    const ChannelSet ch = synth_channel(cfg2);
    const OracleResult r2 = exhaustive_beam_search(cfg2, ch);
    const OracleResult r3 = exhaustive_beam_search(cfg3, ch);
    CHECK(r3.best.wsr_bits >= r2.best.wsr_bits - 1e-9);

    const PrecoderSolution greedy = greedy_energy_select_then_wmmse(cfg3, ch, 200, 1e-8);
    CHECK(rate_report(ch, greedy.P, cfg3).wsr_bits <= r3.best.wsr_bits + 1e-9);
  }
}

TEST_CASE("allsp stays near the enumerated optimum") {
  std::vector<double> ratios;
  for (int s = 0; s < 6; ++s) {
    SystemConfig cfg = tiny_cfg(6, 3, 300 + s);
    const ChannelSet ch = synth_channel(cfg);
    const OracleResult oracle = exhaustive_beam_search(cfg, ch);
    const auto [sol, trace] = allsp_solve(cfg, ch, allsp_init(cfg, ch));
    ratios.push_back(oracle.ratio(rate_report(ch, sol.P, cfg).wsr_bits));
    CHECK(ratios.back() <= 1.0 + 1e-9);
  }
  std::sort(ratios.begin(), ratios.end());
  CHECK(ratios[ratios.size() / 2] >= 0.90);
}

TEST_CASE("joint per-user enumeration") {
  SystemConfig cfg = tiny_cfg(4, 2, 5);
  const ChannelSet ch = synth_channel(cfg);
  const OracleResult res = exhaustive_user_beam_search(cfg, ch);
  CHECK(res.table.size() == 36);  // 6^2

  // Identical users: swapping the joint support leaves the WSR unchanged.
  ChannelSet twin;
  twin.H_ant = {ch.H_ant[0], ch.H_ant[0]};
  derive_angle_domain(twin);
  const OracleResult sym = exhaustive_user_beam_search(cfg, twin);
  std::map<std::vector<std::vector<int>>, double> lookup;
  for (const auto& e : sym.table) lookup[e.supports] = e.wsr_bits;
  for (const auto& e : sym.table) {
    const std::vector<std::vector<int>> swapped = {e.supports[1], e.supports[0]};
    CHECK(e.wsr_bits == doctest::Approx(lookup.at(swapped)).epsilon(1e-9));
  }
}

TEST_CASE("aullsp stays near the joint enumerated optimum") {
  std::vector<double> ratios;
  for (int s = 0; s < 6; ++s) {
    SystemConfig cfg = tiny_cfg(5, 2, 400 + s);
    const ChannelSet ch = synth_channel(cfg);
    const OracleResult oracle = exhaustive_user_beam_search(cfg, ch);
    const auto [sol, trace] = aullsp_solve(cfg, ch, aullsp_init(cfg, ch));
    ratios.push_back(oracle.ratio(rate_report(ch, sol.P, cfg).wsr_bits));
    CHECK(ratios.back() <= 1.0 + 1e-9);
  }
  std::sort(ratios.begin(), ratios.end());
  CHECK(ratios[ratios.size() / 2] >= 0.90);
}

TEST_CASE("finite-difference harness calibration") {
  // Quadratic with a known gradient: f(x) = x^T Q x + b^T x.
  RMat q(3, 3);
  q << 2, 1, 0, 1, 3, 0.5, 0, 0.5, 1;
  RVec b(3);
  b << -1, 0.25, 2;
  const auto fn = [&](const RVec& x) { return x.dot(q * x) + b.dot(x); };
  const auto grad = [&](const RVec& x) { return RVec(2.0 * (q * x) + b); };
  RVec x0(3);
  x0 << 0.3, -0.7, 1.1;
  CHECK(finite_diff_check(fn, grad, x0, 1e-5) < 1e-8);
  CHECK_THROWS_AS(finite_diff_check(fn, grad, x0, 0.0), std::invalid_argument);
}

TEST_CASE("project-and-rescale: in-subspace precoders are fixed points") {
  SystemConfig cfg = SystemConfig::uniform(8, 2, 2, 2, 1.0, 0.25, 4, 70);
  const ChannelSet ch = synth_channel(cfg);
  Rng rng(71);
  const SelectionVector delta = SelectionVector::from_support(8, {1, 3, 4, 6});

  // P_k = diag(delta) H^H X_k at full power lies in the subspace already.
  std::vector<CMat> p(cfg.K);
  CMat diag = CMat::Zero(8, 8);
  for (int i : delta.support()) diag(i, i) = 1.0;
  double total = 0.0;
  for (int k = 0; k < cfg.K; ++k) {
    p[k] = diag * ch.H_all.adjoint() * random_cmat(rng, cfg.total_rx(), cfg.D_k[k]);
    total += p[k].squaredNorm();
  }
  for (auto& pk : p) pk *= std::sqrt(cfg.P_max / total);

  const ProjectRescaleResult res = project_and_rescale(p, {delta}, ch, cfg);
  CHECK(res.eta == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(res.wsr_after == doctest::Approx(res.wsr_before).epsilon(1e-10));
  for (int k = 0; k < cfg.K; ++k) CHECK((res.projected[k] - p[k]).norm() < 1e-10);
  CHECK(res.max_null_residual < 1e-10);

  // Idempotence: projecting the projected set changes nothing.
  const ProjectRescaleResult twice = project_and_rescale(res.projected, {delta}, ch, cfg);
  for (int k = 0; k < cfg.K; ++k)
    CHECK((twice.projected[k] - res.projected[k]).norm() < 1e-12);
}

TEST_CASE("project-and-rescale: null-space components only waste power") {
  // K_s > N guarantees a nonempty channel null space on the support.
  SystemConfig cfg = SystemConfig::uniform(8, 2, 1, 1, 1.0, 0.2, 4, 72);
  const ChannelSet ch = synth_channel(cfg);
  Rng rng(73);
  const SelectionVector delta = SelectionVector::from_support(8, {0, 2, 5, 7});
  std::vector<CMat> p = random_supported_precoders(cfg, rng, {delta}, cfg.P_max);

  const ProjectRescaleResult res = project_and_rescale(p, {delta}, ch, cfg);
  CHECK(res.max_null_residual < 1e-10);  // H annihilates the discarded part
  CHECK(res.eta > 1.0);                  // some power really was wasted
  CHECK(res.wsr_after > res.wsr_before);
  CHECK(res.wsr_after >= res.wsr_before - 1e-9);
}

TEST_CASE("project-and-rescale: per-user variant leaves cross terms intact") {
  SystemConfig cfg = SystemConfig::uniform(8, 2, 1, 1, 1.0, 0.2, 4, 74);
  const ChannelSet ch = synth_channel(cfg);
  Rng rng(75);
  std::vector<SelectionVector> deltas = {SelectionVector::from_support(8, {0, 1, 2, 3}),
                                         SelectionVector::from_support(8, {3, 4, 6, 7})};
  std::vector<CMat> p = random_supported_precoders(cfg, rng, deltas, cfg.P_max);

  const ProjectRescaleResult res = project_and_rescale(p, deltas, ch, cfg);
  CHECK(res.max_null_residual < 1e-10);
  // Before rescaling, every channel product is untouched: H_j (P_m - A_m) = 0.
  for (int m_user = 0; m_user < cfg.K; ++m_user) {
    const CMat a_m = res.projected[m_user] / res.eta;
    for (int j = 0; j < cfg.K; ++j)
      CHECK((ch.H[j] * (p[m_user] - a_m)).norm() < 1e-10);
    // The projection never gains power.
    CHECK(a_m.squaredNorm() <= p[m_user].squaredNorm() + 1e-12);
  }
  CHECK(res.wsr_after >= res.wsr_before - 1e-9);
}

TEST_CASE("solver outputs satisfy the subspace identity") {
  SystemConfig cfg = SystemConfig::uniform(12, 2, 2, 2, 1.0, 0.2, 6, 76);
  const ChannelSet ch = synth_channel(cfg);
  const auto [a_sol, a_trace] = allsp_solve(cfg, ch, allsp_init(cfg, ch));
  const auto [u_sol, u_trace] = aullsp_solve(cfg, ch, aullsp_init(cfg, ch));

  const ProjectRescaleResult pa =
      project_and_rescale(a_sol.P, {a_sol.deltas.front()}, ch, cfg);
  CHECK(pa.eta == doctest::Approx(1.0).epsilon(1e-9));
  for (int k = 0; k < cfg.K; ++k)
    CHECK((pa.projected[k] - a_sol.P[k]).norm() <=
          1e-10 * std::max(1.0, a_sol.P[k].norm()));

  const ProjectRescaleResult pu = project_and_rescale(u_sol.P, u_sol.deltas, ch, cfg);
  CHECK(pu.eta == doctest::Approx(1.0).epsilon(1e-9));
  for (int k = 0; k < cfg.K; ++k)
    CHECK((pu.projected[k] - u_sol.P[k]).norm() <=
          1e-10 * std::max(1.0, u_sol.P[k].norm()));
}

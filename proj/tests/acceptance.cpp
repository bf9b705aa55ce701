/**
 * @file acceptance.cpp
 * @brief End-to-end acceptance suite. Each criterion prints one pass/fail
 * line; the exit code is the number of failures.
 */
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "beamsparse/scenario.hpp"
#include "test_support.hpp"

using namespace beamsparse;

namespace {

int g_failures = 0;

void criterion(int number, const std::string& name, const std::function<void()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  std::string detail;
  bool ok = true;
  try {
    body();
  } catch (const std::exception& e) {
    ok = false;
    detail = e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (ok) {
    std::printf("[PASS] criterion %d: %s (%.2fs)\n", number, name.c_str(), secs);
  } else {
    std::printf("[FAIL] criterion %d: %s (%.2fs) -- %s\n", number, name.c_str(), secs,
                detail.c_str());
    ++g_failures;
  }
  std::fflush(stdout);
}

void expect(bool cond, const std::string& message) {
  if (!cond) throw std::runtime_error(message);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  expect(in.good(), "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
}

SystemConfig desk_cfg(int k_s, double snr_db, std::uint64_t seed) {
  SystemConfig cfg = SystemConfig::uniform(32, 4, 2, 2, 1.0, 1.0, k_s, seed);
  cfg.sigma2 = noise_from_snr(cfg, snr_db);
  return cfg;
}

// ---------------------------------------------------------------------------

void crit1_cost_arithmetic() {
  expect(n_sym({8, 12, 10, 12}) == 11520, "n_sym(8,12,10,12) != 11520");
  expect(n_sym({8, 12, 240, 12}) == 276480, "120 ms variant != 276480");
  const ResourceGrid grid{8, 12, 10, 12};
  expect(cost_model(128, 16, 64, grid).reduction_fraction == 0.28125,
         "reduction at K_s=64 not exactly 28.125%");
  expect(cost_model(128, 16, 48, grid).reduction_fraction == 0.40625,
         "reduction at K_s=48 not exactly 40.625%");
  expect(cost_model(128, 16, 32, grid).reduction_fraction == 0.53125,
         "reduction at K_s=32 not exactly 53.125%");
  expect(cost_model(128, 16, 64, grid).dense_per_symbol == 2048, "dense/symbol != 2048");
  expect(cost_model(128, 16, 64, grid).sparse_per_symbol == 1472, "sparse/symbol != 1472");
}

void crit2_path_equivalence() {
  const ResourceGrid grid{8, 12, 10, 12};
  int outputs = 0;
  SparseOptions opt;
  opt.max_iter = 15;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    for (int k_s : {16, 8}) {
      SystemConfig cfg = SystemConfig::uniform(32, 4, 2, 2, 1.0, 1.0, k_s, seed);
      cfg.sigma2 = noise_from_snr(cfg, 10.0);
      const ChannelSet ch = synth_channel(cfg);
      const auto [a_sol, a_tr] = allsp_solve(cfg, ch, allsp_init(cfg, ch), opt);
      const auto [u_sol, u_tr] = aullsp_solve(cfg, ch, aullsp_init(cfg, ch), opt);
      const PrecoderSolution g_sol = greedy_energy_select_then_wmmse(cfg, ch, 15, 1e-5);
      for (const PrecoderSolution* sol : {&a_sol, &u_sol, &g_sol}) {
        // measured_vs_model throws if any of the 100 symbol vectors
        // disagrees beyond 1e-10 relative between the two apply paths.
        const CostReport rep = measured_vs_model(*sol, grid, 100, seed);
        expect(rep.measured_angle_per_symbol ==
                   static_cast<std::uint64_t>(cfg.K_s) * cfg.total_streams(),
               "angle-stage count != K_s*D");
        expect(rep.measured_fft_per_symbol ==
                   static_cast<std::uint64_t>(cfg.M / 2) * 5,  // log2(32) = 5
               "FFT count != (M/2)log2(M)");
        expect(rep.measured_dense_per_symbol ==
                   static_cast<std::uint64_t>(cfg.M) * cfg.total_streams(),
               "dense count != M*D");
        ++outputs;
      }
    }
  }
  expect(outputs >= 20, "fewer than 20 solver outputs exercised");
}

void crit3_subspace_structure() {
  SparseOptions opt;
  opt.max_iter = 20;
  // Subspace identity on solver outputs.
  for (std::uint64_t seed = 11; seed <= 15; ++seed) {
    SystemConfig cfg = desk_cfg(12, 10.0, seed);
    const ChannelSet ch = synth_channel(cfg);
    const auto [a_sol, a_tr] = allsp_solve(cfg, ch, allsp_init(cfg, ch), opt);
    expect(projection_residual(a_sol, ch) < 1e-10, "allsp projection residual >= 1e-10");
    const auto [u_sol, u_tr] = aullsp_solve(cfg, ch, aullsp_init(cfg, ch), opt);
    expect(projection_residual(u_sol, ch) < 1e-10, "aullsp projection residual >= 1e-10");
  }
  // Project-and-rescale on 100 random feasible row-supported precoders:
  // 50 common supports, 50 per-user supports.
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    SystemConfig cfg = SystemConfig::uniform(16, 2, 2, 2, 1.0, 1.0, 6, 500 + trial);
    cfg.sigma2 = noise_from_snr(cfg, 8.0);
    const ChannelSet ch = synth_channel(cfg);
    const bool common = trial < 50;
    std::vector<SelectionVector> deltas;
    if (common) {
      deltas = {select_beams(RVec::NullaryExpr(16, [&](Eigen::Index) {
                               return rng.uniform(0.0, 1.0);
                             }),
                             cfg.K_s)};
    } else {
      for (int k = 0; k < cfg.K; ++k)
        deltas.push_back(select_beams(
            RVec::NullaryExpr(16, [&](Eigen::Index) { return rng.uniform(0.0, 1.0); }),
            cfg.K_s));
    }
    std::vector<CMat> p(cfg.K);
    double total = 0.0;
    for (int k = 0; k < cfg.K; ++k) {
      const SelectionVector& d = common ? deltas.front() : deltas[k];
      p[k] = CMat::Zero(cfg.M, cfg.D_k[k]);
      for (int i : d.support())
        for (int j = 0; j < cfg.D_k[k]; ++j) p[k](i, j) = rng.cnormal();
      total += p[k].squaredNorm();
    }
    const double power = (trial % 2 == 0) ? cfg.P_max : 0.8 * cfg.P_max;
    for (auto& pk : p) pk *= std::sqrt(power / total);
    const ProjectRescaleResult res = project_and_rescale(p, deltas, ch, cfg);
    expect(res.max_null_residual < 1e-10, "discarded component visible to the channel");
    expect(res.wsr_after >= res.wsr_before - 1e-9, "project-and-rescale decreased WSR");
  }
}

void crit4_gradient_correctness() {
  Rng rng(88);
  int checked = 0;
  for (int inst = 0; inst < 20; ++inst) {
    const int m = 4 + 2 * (inst % 3);  // 4, 6, 8
    SystemConfig cfg = SystemConfig::uniform(m, 2, 1, 1, 1.0, 1.0, 2, 700 + inst);
    cfg.sigma2 = noise_from_snr(cfg, 10.0);
    const ChannelSet ch = synth_channel(cfg);
    RVec point(m);
    for (int i = 0; i < m; ++i) point(i) = rng.uniform(0.15, 0.85);
    if (inst % 2 == 0) {
      AllspState st = allsp_init(cfg, ch);
      for (int k = 0; k < cfg.K; ++k)
        st.X[k] = testsupport::random_cmat(rng, cfg.total_rx(), cfg.D_k[k]);
      st.U = update_U(st, ch, cfg);
      st.W = update_W(st, ch, cfg);
      st.mu = update_X(st, ch, cfg).mu;
      const double err = finite_diff_check(
          [&](const RVec& d) { return eval_f_delta(st, ch, cfg, d); },
          [&](const RVec& d) { return grad_f_delta_at(st, ch, cfg, d); }, point, 1e-5);
      expect(err < 1e-5, "grad_f_delta FD mismatch: " + format_number(err));
    } else {
      AullspState st = aullsp_init(cfg, ch);
      for (int k = 0; k < cfg.K; ++k)
        st.X[k] = testsupport::random_cmat(rng, cfg.total_rx(), cfg.D_k[k]);
      st.U = update_U_user(st, ch, cfg);
      st.W = update_W_user(st, ch, cfg);
      st.gamma = update_X_user(st, ch, cfg).gamma;
      for (int k = 0; k < cfg.K; ++k) {
        const double err = finite_diff_check(
            [&](const RVec& d) { return eval_fk_delta(st, ch, cfg, k, d); },
            [&](const RVec& d) { return grad_fk_delta_at(st, ch, cfg, k, d); }, point,
            1e-5);
        expect(err < 1e-5, "grad_fk_delta FD mismatch: " + format_number(err));
      }
    }
    ++checked;
  }
  expect(checked == 20, "wrong instance count");
}

void crit5_monotone_convergence() {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SystemConfig cfg = desk_cfg(16, 10.0, seed);
    const ChannelSet ch = synth_channel(cfg);

    const auto [dsol, dtrace] =
        dense_wmmse_solve(cfg, ch, matched_filter_init(ch, cfg), 50, 1e-5);
    std::vector<double> dwsr;
    for (size_t i = 0; i < dtrace.size(); ++i) {
      dwsr.push_back(dtrace[i].wsr_bits);
      if (i > 0)
        expect(dtrace[i].wsr_bits >= dtrace[i - 1].wsr_bits - 1e-8,
               "dense WMMSE WSR decreased");
    }
    expect(iterations_to_tolerance(dwsr) <= 20, "dense WMMSE slower than 20 iterations");

    const auto check_sparse = [&](const SparseTrace& trace, const std::string& who) {
      std::vector<double> wsr;
      for (size_t i = 0; i < trace.size(); ++i) {
        wsr.push_back(trace[i].wsr_bits);
        if (i > 0)
          expect(trace[i].objective_nats <=
                     trace[i - 1].objective_nats +
                         1e-6 * std::max(std::abs(trace[i - 1].objective_nats), 1.0),
                 who + " objective increased");
      }
      expect(iterations_to_tolerance(wsr) <= 20, who + " slower than 20 iterations");
    };
    const auto [asol, atrace] = allsp_solve(cfg, ch, allsp_init(cfg, ch));
    check_sparse(atrace, "allsp");
    const auto [usol, utrace] = aullsp_solve(cfg, ch, aullsp_init(cfg, ch));
    check_sparse(utrace, "aullsp");
  }
}

void crit6_performance_ordering() {
  Scenario sc = Scenario::desk_default();
  sc.snr_db = {-6.0, 10.0, 18.0};
  sc.k_s_list = {16, 12, 8};
  sc.trials = 20;
  const RunSummary summary = run_sweeps(sc, 8);
  for (double snr : sc.snr_db) {
    for (int k_s : sc.k_s_list) {
      const double gap_a = summary.median_gap("allsp", snr, k_s);
      const double gap_u = summary.median_gap("aullsp", snr, k_s);
      expect(gap_u <= gap_a, "median gap(AULLSP) > median gap(ALLSP) at snr " +
                                 format_number(snr) + ", K_s " + std::to_string(k_s));
      expect(summary.median_wsr("greedy", snr, k_s) <=
                 summary.median_wsr("aullsp", snr, k_s),
             "greedy median WSR above AULLSP at snr " + format_number(snr) + ", K_s " +
                 std::to_string(k_s));
    }
  }
  const double headline = summary.median_gap("aullsp", 10.0, 16);
  expect(headline <= 0.05, "AULLSP median gap at K_s=M/2, 10 dB exceeds 5%: " +
                               format_number(headline));
}

void crit7_oracle_ratio() {
  std::vector<double> allsp_ratio, aullsp_ratio;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SystemConfig cfg = SystemConfig::uniform(6, 2, 1, 1, 1.0, 1.0, 3, seed);
    cfg.sigma2 = noise_from_snr(cfg, 10.0);
    const ChannelSet ch = synth_channel(cfg);
    const OracleResult oracle = exhaustive_beam_search(cfg, ch);
    const auto [sol, trace] = allsp_solve(cfg, ch, allsp_init(cfg, ch));
    allsp_ratio.push_back(oracle.ratio(rate_report(ch, sol.P, cfg).wsr_bits));
  }
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SystemConfig cfg = SystemConfig::uniform(5, 2, 1, 1, 1.0, 1.0, 2, seed);
    cfg.sigma2 = noise_from_snr(cfg, 10.0);
    const ChannelSet ch = synth_channel(cfg);
    const OracleResult oracle = exhaustive_user_beam_search(cfg, ch);
    const auto [sol, trace] = aullsp_solve(cfg, ch, aullsp_init(cfg, ch));
    aullsp_ratio.push_back(oracle.ratio(rate_report(ch, sol.P, cfg).wsr_bits));
  }
  const double med_a = median_of(allsp_ratio);
  const double med_u = median_of(aullsp_ratio);
  expect(med_a >= 0.90, "ALLSP median oracle ratio " + format_number(med_a) + " < 0.90");
  expect(med_u >= 0.90, "AULLSP median oracle ratio " + format_number(med_u) + " < 0.90");
}

void crit8_complexity_scaling() {
  const SystemConfig dims = Scenario::desk_default().cfg;
  const auto rows = run_complexity_probe({32, 64, 128, 256}, dims);
  std::vector<double> ms, wm, al, au;
  for (const auto& r : rows) {
    ms.push_back(r.m);
    wm.push_back(static_cast<double>(r.wmmse_dominant));
    al.push_back(static_cast<double>(r.allsp_dominant));
    au.push_back(static_cast<double>(r.aullsp_dominant));
  }
  const double s_wm = fit_loglog_slope(ms, wm);
  const double s_al = fit_loglog_slope(ms, al);
  const double s_au = fit_loglog_slope(ms, au);
  expect(std::abs(s_wm - 3.0) <= 0.15, "dense slope " + format_number(s_wm));
  expect(std::abs(s_al - 1.0) <= 0.15, "allsp slope " + format_number(s_al));
  expect(std::abs(s_au - 1.0) <= 0.15, "aullsp slope " + format_number(s_au));
}

void crit9_determinism() {
  const auto base = std::filesystem::temp_directory_path() / "beamsparse_acceptance";
  std::filesystem::remove_all(base);
  Scenario sc = Scenario::desk_default();
  sc.snr_db = {0.0, 10.0};
  sc.k_s_list = {16, 8};
  sc.trials = 3;

  std::vector<std::vector<std::string>> files(2);
  for (int round = 0; round < 2; ++round) {
    sc.out_dir = (base / (round == 0 ? "a" : "b")).string();
    const RunSummary summary = run_sweeps(sc, 4);
    files[round] = emit_sweep(summary, sc);
    const auto conv = run_convergence(sc);
    files[round].insert(files[round].end(), conv.begin(), conv.end());
  }
  expect(files[0].size() == files[1].size(), "file sets differ");
  for (size_t i = 0; i < files[0].size(); ++i)
    expect(slurp(files[0][i]) == slurp(files[1][i]),
           "outputs differ between identical runs: " + files[0][i]);
  std::filesystem::remove_all(base);
}

}  // namespace

int main() {
  std::printf("beamsparse acceptance suite\n");
  criterion(1, "cost arithmetic (exact)", crit1_cost_arithmetic);
  criterion(2, "sparse/dense apply-path equivalence and counter exactness",
            crit2_path_equivalence);
  criterion(3, "subspace structure and project-and-rescale", crit3_subspace_structure);
  criterion(4, "selection-gradient finite-difference agreement", crit4_gradient_correctness);
  criterion(5, "monotone convergence at desk scale", crit5_monotone_convergence);
  criterion(6, "performance ordering vs dense WMMSE", crit6_performance_ordering);
  criterion(7, "exhaustive-oracle ratios", crit7_oracle_ratio);
  criterion(8, "analytic complexity scaling", crit8_complexity_scaling);
  criterion(9, "byte-identical reruns", crit9_determinism);
  if (g_failures == 0)
    std::printf("all criteria passed\n");
  else
    std::printf("%d criteria FAILED\n", g_failures);
  return g_failures;
}

/**
 * @file main.cpp
 * @brief beamsparse command line: converge, sweep, cost, oracle, complexity.
 */
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "beamsparse/scenario.hpp"

namespace {

using namespace beamsparse;

struct CommonFlags {
  std::string config;
  std::string out;
  std::string algo;
  std::string channel_file;
  std::string save_channel_path;
  long seed = -1;
  int threads = 1;
};

void add_common(CLI::App* cmd, CommonFlags* flags) {
  cmd->add_option("--config", flags->config, "Scenario config file (flat key = value)");
  cmd->add_option("--out", flags->out, "Output directory (overrides config)");
  cmd->add_option("--algo", flags->algo, "Algorithm: wmmse|allsp|aullsp|greedy|all");
  cmd->add_option("--seed", flags->seed, "Base RNG seed (overrides config)");
  cmd->add_option("--channel-file", flags->channel_file,
                  "Load the channel from a file instead of synthesizing");
}

Scenario make_scenario(const CommonFlags& flags) {
  Scenario sc = flags.config.empty() ? Scenario::desk_default()
                                     : Scenario::from_file(flags.config);
  if (!flags.out.empty()) sc.out_dir = flags.out;
  if (!flags.algo.empty()) sc.algorithm = flags.algo;
  if (flags.seed >= 0) sc.cfg.seed = static_cast<std::uint64_t>(flags.seed);
  if (!flags.channel_file.empty()) sc.channel_source = flags.channel_file;
  return sc;
}

void print_files(const std::vector<std::string>& files) {
  for (const auto& f : files) std::printf("wrote %s\n", f.c_str());
}

int cmd_converge(const CommonFlags& flags) {
  const Scenario sc = make_scenario(flags);
  if (!flags.save_channel_path.empty()) {
    save_channel(sc.make_channel(sc.cfg.seed), flags.save_channel_path);
    std::printf("wrote %s\n", flags.save_channel_path.c_str());
  }
  print_files(run_convergence(sc));
  return 0;
}

int cmd_sweep(const CommonFlags& flags) {
  const Scenario sc = make_scenario(flags);
  const RunSummary summary = run_sweeps(sc, flags.threads);
  print_files(emit_sweep(summary, sc));
  for (const auto& algo : sc.algorithms()) {
    if (algo == "wmmse") continue;
    for (double snr : sc.snr_db)
      for (int k_s : sc.k_s_list)
        std::printf("%-7s snr %6.1f dB  K_s %3d  median wsr %8.4f  median gap %7.4f%%\n",
                    algo.c_str(), snr, k_s, summary.median_wsr(algo, snr, k_s),
                    100.0 * summary.median_gap(algo, snr, k_s));
  }
  return 0;
}

int cmd_cost(const CommonFlags& flags, int trials) {
  Scenario sc = make_scenario(flags);
  std::vector<CostReport> models;
  for (int k_s : sc.k_s_list)
    models.push_back(cost_model(sc.cfg.M, sc.cfg.total_streams(), k_s, sc.grid));

  SystemConfig cfg = sc.cfg;
  cfg.sigma2 = noise_from_snr(cfg, sc.snr_db.front());
  const ChannelSet ch = sc.make_channel(cfg.seed);
  const auto [sol, trace] = allsp_solve(cfg, ch, allsp_init(cfg, ch));
  const CostReport measured = measured_vs_model(sol, sc.grid, trials, cfg.seed);

  std::printf("model (M=%d, D=%d, n_sym=%ld):\n", sc.cfg.M, sc.cfg.total_streams(),
              models.front().n_sym);
  std::printf("  %6s %16s %16s %12s\n", "K_s", "dense/sym", "sparse/sym", "reduction");
  for (const auto& m : models)
    std::printf("  %6d %16ld %16ld %11.3f%%\n", m.k_s, m.dense_per_symbol,
                m.sparse_per_symbol, 100.0 * m.reduction_fraction);
  std::printf("measured (allsp solution at K_s=%d, %d symbol vectors):\n", cfg.K_s, trials);
  std::printf("  dense/sym %llu  angle/sym %llu  fft/sym %llu (nontrivial %llu)\n",
              static_cast<unsigned long long>(measured.measured_dense_per_symbol),
              static_cast<unsigned long long>(measured.measured_angle_per_symbol),
              static_cast<unsigned long long>(measured.measured_fft_per_symbol),
              static_cast<unsigned long long>(measured.measured_fft_nontrivial_per_symbol));
  print_files(emit_cost(models, measured, sc));
  return 0;
}

int cmd_oracle(const CommonFlags& flags) {
  const Scenario sc = make_scenario(flags);
  SystemConfig cfg = sc.cfg;
  cfg.sigma2 = noise_from_snr(cfg, sc.snr_db.front());
  const ChannelSet ch = sc.make_channel(cfg.seed);

  const OracleResult res = exhaustive_beam_search(cfg, ch);
  print_files(emit_oracle(res, sc));
  std::printf("best support:");
  for (int i : res.best.supports.front()) std::printf(" %d", i);
  std::printf("  wsr %.6f bits\n", res.best.wsr_bits);

  const auto [sol, trace] = allsp_solve(cfg, ch, allsp_init(cfg, ch));
  const double allsp_wsr = rate_report(ch, sol.P, cfg).wsr_bits;
  std::printf("allsp wsr %.6f bits  ratio %.4f\n", allsp_wsr, res.ratio(allsp_wsr));
  return 0;
}

int cmd_complexity(const CommonFlags& flags, std::vector<int> m_list, int iterations) {
  const Scenario sc = make_scenario(flags);
  if (m_list.empty()) m_list = {32, 64, 128, 256};
  const auto rows = run_complexity_probe(m_list, sc.cfg, iterations);
  print_files(emit_complexity(rows, sc));
  std::vector<double> ms, wm, al;
  for (const auto& r : rows) {
    ms.push_back(r.m);
    wm.push_back(static_cast<double>(r.wmmse_dominant));
    al.push_back(static_cast<double>(r.allsp_dominant));
    std::printf("M %4d: wmmse %12lld  allsp %12lld  aullsp %12lld (dominant mults/iter)\n",
                r.m, r.wmmse_dominant, r.allsp_dominant, r.aullsp_dominant);
  }
  std::printf("log-log slope: wmmse %.3f, allsp %.3f\n", fit_loglog_slope(ms, wm),
              fit_loglog_slope(ms, al));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse angle-domain WMMSE precoding workbench"};
  app.require_subcommand(1);

  CommonFlags flags;
  int cost_trials = 100;
  std::vector<int> m_list;
  int iterations = 1;

  CLI::App* converge = app.add_subcommand("converge", "Per-iteration traces");
  add_common(converge, &flags);
  converge->add_option("--save-channel", flags.save_channel_path,
                       "Also export the synthesized channel to this file");
  CLI::App* sweep = app.add_subcommand("sweep", "SNR x K_s x seed sweep vs dense WMMSE");
  add_common(sweep, &flags);
  sweep->add_option("--threads", flags.threads, "Worker pool size");
  CLI::App* cost = app.add_subcommand("cost", "Signal-weighting cost model and measurement");
  add_common(cost, &flags);
  cost->add_option("--trials", cost_trials, "Symbol vectors for the measured path");
  CLI::App* oracle = app.add_subcommand("oracle", "Exhaustive support enumeration (tiny M)");
  add_common(oracle, &flags);
  CLI::App* complexity = app.add_subcommand("complexity", "Analytic multiply-count scaling");
  add_common(complexity, &flags);
  complexity->add_option("--m-list", m_list, "Antenna counts to probe");
  complexity->add_option("--iterations", iterations, "Iterations to account for");

  CLI11_PARSE(app, argc, argv);

  try {
    if (converge->parsed()) return cmd_converge(flags);
    if (sweep->parsed()) return cmd_sweep(flags);
    if (cost->parsed()) return cmd_cost(flags, cost_trials);
    if (oracle->parsed()) return cmd_oracle(flags);
    if (complexity->parsed()) return cmd_complexity(flags, m_list, iterations);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

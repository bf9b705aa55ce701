/**
 * @file scenario.hpp
 * @brief Experiment orchestration: flat-text scenario configs, matched-seed
 * sweeps, convergence traces, the analytic complexity probe, and
 * deterministic CSV/JSON emission.
 */
#pragma once

#include <optional>
#include <string>

#include "beamsparse/aullsp.hpp"
#include "beamsparse/oracle.hpp"
#include "beamsparse/weighting.hpp"
#include "beamsparse/wmmse_dense.hpp"

namespace beamsparse {

/// A full experiment description. Parsed from a flat key=value text file;
/// unknown keys are rejected.
struct Scenario {
  SystemConfig cfg;  // sigma2 is filled per SNR point at run time
  std::string channel_source = "synthesize";  // "synthesize" or a channel file path
  std::string algorithm = "all";              // wmmse | allsp | aullsp | greedy | all
  std::vector<double> snr_db = {10.0};
  std::vector<int> k_s_list;
  int trials = 1;
  ResourceGrid grid;
  std::string out_dir = "results";

  static Scenario from_file(const std::string& path);
  static Scenario from_string(const std::string& text);
  /// Desk-scale default: M=32, K=4, N_k=D_k=2, K_s in {16,12,8},
  /// SNR {-6,0,6,12,18} dB, 20 trials.
  static Scenario desk_default();

  std::string canonical_text() const;  // sorted key=value lines
  std::string hash() const;            // FNV-1a 64 over canonical_text, hex
  std::vector<std::string> algorithms() const;
  ChannelSet make_channel(std::uint64_t seed) const;
};

struct SweepCell {
  std::string algo;
  double snr_db = 0.0;
  int k_s = 0;
  std::uint64_t seed = 0;
  double wsr_bits = 0.0;
  double gap_vs_wmmse = 0.0;
  int iters_to_tol = 0;
  long long sparse_total_mults = 0;
  long long dense_total_mults = 0;
};

struct RunSummary {
  std::vector<SweepCell> cells;

  /// Median over seeds of the given field at one (algo, snr, k_s) point.
  double median_wsr(const std::string& algo, double snr, int k_s) const;
  double median_gap(const std::string& algo, double snr, int k_s) const;
};

/// First 1-based iteration at which the relative WSR change drops below
/// `tol`; returns the trace length if never.
int iterations_to_tolerance(const std::vector<double>& wsr_per_iteration, double tol = 1e-3);

/// Matched-seed sweep over (algorithm, snr, K_s, seed) cells. Channels are a
/// function of the seed alone, so every algorithm at a given (seed, snr)
/// sees the identical ChannelSet. `threads` bounds the worker pool.
RunSummary run_sweeps(const Scenario& sc, int threads = 1);

/// Per-algorithm per-iteration trace files for the first SNR point; returns
/// the written file paths.
std::vector<std::string> run_convergence(const Scenario& sc);

struct ComplexityRow {
  int m = 0;
  int k_s = 0;  // M/2
  long long wmmse_dominant = 0, wmmse_total = 0;
  long long allsp_dominant = 0, allsp_total = 0;
  long long aullsp_dominant = 0, aullsp_total = 0;
};

/// Analytic per-iteration multiply counts of the precoder (X) update. The
/// dominant column isolates the step that sets the asymptotic order: the
/// M x M inversion for the dense baseline, the effective-covariance
/// construction (with K_s = M/2 active beams) for the sparse solvers.
std::vector<ComplexityRow> run_complexity_probe(const std::vector<int>& m_list,
                                                const SystemConfig& dims,
                                                int iterations = 1);

/// Least-squares slope of ln(y) against ln(x).
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Writes sweep_<hash>.csv and sweep_<hash>.json under sc.out_dir; returns
/// the file paths. Output bytes are a pure function of the scenario.
std::vector<std::string> emit_sweep(const RunSummary& summary, const Scenario& sc);

std::vector<std::string> emit_complexity(const std::vector<ComplexityRow>& rows,
                                         const Scenario& sc);

std::vector<std::string> emit_oracle(const OracleResult& result, const Scenario& sc);

std::vector<std::string> emit_cost(const std::vector<CostReport>& models,
                                   const CostReport& measured, const Scenario& sc);

/// Formats a double with enough digits to be stable and readable ("%.12g").
std::string format_number(double v);

}  // namespace beamsparse

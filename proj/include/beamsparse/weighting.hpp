/**
 * @file weighting.hpp
 * @brief Signal-weighting cost model and the instrumented dense / sparse
 * precoder application paths.
 *
 * Multiply counters follow the per-coherence-block accounting: a dense
 * antenna-domain apply costs M*D complex multiplies per symbol; the sparse
 * angle-domain path costs K_s*D for the masked multiply plus (M/2)log2(M)
 * for the inverse FFT back to the antenna domain. The FFT counter includes
 * trivial twiddles so that counts match the model exactly; nontrivial
 * multiplies are tracked separately.
 */
#pragma once

#include <cstdint>
#include <string>

#include "beamsparse/precoder.hpp"

namespace beamsparse {

struct ResourceGrid {
  long rbs = 8;
  long subcarriers_per_rb = 12;
  long slots = 10;
  long data_symbols_per_slot = 12;
};

/// Resource elements per coherence block: product of the grid fields.
long n_sym(const ResourceGrid& grid);

struct MultiplyCounter {
  std::uint64_t dense_stage = 0;     // antenna-domain matrix-vector multiplies
  std::uint64_t angle_stage = 0;     // masked angle-domain multiplies
  std::uint64_t fft_stage = 0;       // butterfly twiddle multiplies (all)
  std::uint64_t fft_nontrivial = 0;  // twiddle multiplies with w != 1
};

struct CostReport {
  int m = 0;
  int d = 0;
  int k_s = 0;
  long n_sym = 0;
  long dense_per_symbol = 0;   // M*D
  long sparse_per_symbol = 0;  // K_s*D + (M/2)log2(M)
  long long dense_total = 0;
  long long sparse_total = 0;
  double reduction_fraction = 0.0;  // 1 - sparse/dense, exact for power-of-two M
  bool power_of_two_fft = true;     // false: ceil(log2 M) model, direct DFT path
  bool sparse_beneficial = true;    // sparse_per_symbol < dense_per_symbol

  // Instrumented counts (filled by measured_vs_model).
  int trials = 0;
  std::uint64_t measured_dense_per_symbol = 0;
  std::uint64_t measured_angle_per_symbol = 0;
  std::uint64_t measured_fft_per_symbol = 0;
  std::uint64_t measured_fft_nontrivial_per_symbol = 0;

  std::string to_json() const;
};

/// Analytic cost model for M beams, D streams and K_s active beams.
CostReport cost_model(int m, int d, int k_s, const ResourceGrid& grid);

/// x = P_ant s. Counter: dense_stage += M*D.
CVec apply_dense(const CMat& p_ant, const CVec& s, MultiplyCounter* counter = nullptr);

/// Unitary inverse DFT. For power-of-two sizes, an iterative radix-2
/// transform counting (M/2)log2(M) butterfly multiplies; otherwise a direct
/// matrix multiply counting M*M.
CVec ifft_unitary(const CVec& v, MultiplyCounter* counter = nullptr);

/// Row-compressed row-sparse precoder: one block per user, each holding the
/// active rows of that user's angle-domain precoder.
struct RowSparsePrecoder {
  struct Block {
    int col0 = 0;             // first column of this user's streams
    std::vector<int> rows;    // active beam indices
    CMat values;              // rows.size() x D_k
  };
  int m = 0;
  int d = 0;
  std::vector<Block> blocks;

  static RowSparsePrecoder from_solution(const PrecoderSolution& sol);
  CMat dense() const;  // M x D angle-domain matrix
};

/// Antenna-domain transmit vector via the sparse path: masked angle-domain
/// multiply (angle_stage += sum_k |rows_k| * D_k) followed by ifft_unitary.
CVec apply_sparse(const RowSparsePrecoder& p, const CVec& s,
                  MultiplyCounter* counter = nullptr);

/// Runs both apply paths over `trials` random symbol vectors, checks the
/// instrumented counts against the analytic model and returns the combined
/// report.
CostReport measured_vs_model(const PrecoderSolution& sol, const ResourceGrid& grid,
                             int trials, std::uint64_t seed = 1);

}  // namespace beamsparse

/**
 * @file oracle.hpp
 * @brief Desk-scale ground-truth machinery: exhaustive support enumeration,
 * finite-difference gradient checks and the project-and-rescale construction
 * behind the optimal-precoder subspace structure.
 */
#pragma once

#include <functional>
#include <map>

#include "beamsparse/precoder.hpp"
#include "beamsparse/rate.hpp"

namespace beamsparse {

/// One enumerated support assignment: `supports` holds a single set for the
/// common-support search or one set per user for the joint search.
struct SupportEntry {
  std::vector<std::vector<int>> supports;
  double wsr_bits = 0.0;
};

struct OracleResult {
  SupportEntry best;
  std::vector<SupportEntry> table;  // enumeration order (lexicographic)

  double ratio(double algorithm_wsr) const {
    return best.wsr_bits > 0.0 ? algorithm_wsr / best.wsr_bits : 0.0;
  }
};

/// All C(M, K_s) common supports, each solved by the restricted WMMSE to
/// 200 iterations / 1e-8 tolerance. Throws when the enumeration exceeds
/// `max_supports`. Ties on WSR resolve to the lexicographically smallest
/// support.
OracleResult exhaustive_beam_search(const SystemConfig& cfg, const ChannelSet& ch,
                                    long max_supports = 10000);

/// Joint per-user enumeration over C(M, K_s)^K support tuples, each solved by
/// the per-user-support WMMSE (selection frozen).
OracleResult exhaustive_user_beam_search(const SystemConfig& cfg, const ChannelSet& ch,
                                         long max_supports = 10000);

/// Worst-coordinate error of `grad` against central finite differences of
/// `fn` at `point`, normalized by the finite-difference gradient scale.
double finite_diff_check(const std::function<double(const RVec&)>& fn,
                         const std::function<RVec(const RVec&)>& grad,
                         const RVec& point, double step);

struct ProjectRescaleResult {
  std::vector<CMat> projected;  // eta-scaled projections A_k
  double wsr_before = 0.0;
  double wsr_after = 0.0;
  double eta = 1.0;
  double max_null_residual = 0.0;  // max_k ||H B_k|| / ||P_k||
  bool rank_deficient = false;     // some support basis lost rank
};

/// Splits each row-supported precoder into its component inside
/// span(diag(delta_k) H^H) and the orthogonal remainder, verifies the
/// remainder is channel-invisible, and rescales the projected set to the
/// full power budget. `supports` holds one common entry or K per-user ones.
ProjectRescaleResult project_and_rescale(const std::vector<CMat>& precoders,
                                         const std::vector<SelectionVector>& supports,
                                         const ChannelSet& ch, const SystemConfig& cfg);

/// Binomial coefficient with saturation (used for enumeration budgeting).
long long binomial(int n, int k);

/// All size-k subsets of {0..n-1} in lexicographic order.
std::vector<std::vector<int>> enumerate_subsets(int n, int k);

}  // namespace beamsparse

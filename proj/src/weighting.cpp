#include "beamsparse/weighting.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "beamsparse/rng.hpp"
#include "json.hpp"

namespace beamsparse {

namespace {

bool is_power_of_two(int m) { return m > 0 && (m & (m - 1)) == 0; }

int log2_exact(int m) {
  int l = 0;
  while ((1 << l) < m) ++l;
  return l;
}

}  // namespace

long n_sym(const ResourceGrid& grid) {
  if (grid.rbs < 1 || grid.subcarriers_per_rb < 1 || grid.slots < 1 ||
      grid.data_symbols_per_slot < 1)
    throw std::invalid_argument("ResourceGrid: all fields must be positive");
  return grid.rbs * grid.subcarriers_per_rb * grid.slots * grid.data_symbols_per_slot;
}

CostReport cost_model(int m, int d, int k_s, const ResourceGrid& grid) {
  if (m < 1 || d < 1 || k_s < 1 || k_s > m)
    throw std::invalid_argument("cost_model: need 1 <= K_s <= M and D >= 1");
  CostReport rep;
  rep.m = m;
  rep.d = d;
  rep.k_s = k_s;
  rep.n_sym = n_sym(grid);
  rep.power_of_two_fft = is_power_of_two(m);
  const int log2m =
      rep.power_of_two_fft ? log2_exact(m) : static_cast<int>(std::ceil(std::log2(m)));
  rep.dense_per_symbol = static_cast<long>(m) * d;
  rep.sparse_per_symbol = static_cast<long>(k_s) * d + (static_cast<long>(m) / 2) * log2m;
  rep.dense_total = static_cast<long long>(rep.n_sym) * rep.dense_per_symbol;
  rep.sparse_total = static_cast<long long>(rep.n_sym) * rep.sparse_per_symbol;
  rep.reduction_fraction =
      1.0 - static_cast<double>(rep.sparse_per_symbol) / static_cast<double>(rep.dense_per_symbol);
  rep.sparse_beneficial = rep.sparse_per_symbol < rep.dense_per_symbol;
  return rep;
}

CVec apply_dense(const CMat& p_ant, const CVec& s, MultiplyCounter* counter) {
  if (p_ant.cols() != s.size())
    throw std::invalid_argument("apply_dense: symbol length must equal stream count");
  if (counter)
    counter->dense_stage += static_cast<std::uint64_t>(p_ant.rows()) * p_ant.cols();
  return p_ant * s;
}

CVec ifft_unitary(const CVec& v, MultiplyCounter* counter) {
  const int m = static_cast<int>(v.size());
  if (!is_power_of_two(m)) {
    if (counter) counter->fft_stage += static_cast<std::uint64_t>(m) * m;
    return dft_matrix(m).adjoint() * v;
  }
  CVec x = v;
  // Bit-reversal permutation, then in-place decimation-in-time butterflies
  // with e^{+j...} twiddles.
  for (int i = 1, j = 0; i < m; ++i) {
    int bit = m >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x(i), x(j));
  }
  for (int len = 2; len <= m; len <<= 1) {
    const double ang = 2.0 * kPi / len;
    for (int i = 0; i < m; i += len) {
      for (int h = 0; h < len / 2; ++h) {
        const Complex w = std::polar(1.0, ang * h);
        const Complex odd = x(i + h + len / 2) * w;
        if (counter) {
          ++counter->fft_stage;
          if (h != 0) ++counter->fft_nontrivial;
        }
        x(i + h + len / 2) = x(i + h) - odd;
        x(i + h) += odd;
      }
    }
  }
  return x / std::sqrt(static_cast<double>(m));
}

RowSparsePrecoder RowSparsePrecoder::from_solution(const PrecoderSolution& sol) {
  RowSparsePrecoder p;
  p.m = static_cast<int>(sol.P.front().rows());
  p.blocks.resize(sol.P.size());
  int col = 0;
  for (size_t k = 0; k < sol.P.size(); ++k) {
    const SelectionVector& delta =
        sol.common_support ? sol.deltas.front() : sol.deltas[k];
    Block& b = p.blocks[k];
    b.col0 = col;
    b.rows = delta.support();
    b.values.resize(b.rows.size(), sol.P[k].cols());
    for (size_t i = 0; i < b.rows.size(); ++i) b.values.row(i) = sol.P[k].row(b.rows[i]);
    col += static_cast<int>(sol.P[k].cols());
  }
  p.d = col;
  return p;
}

CMat RowSparsePrecoder::dense() const {
  CMat out = CMat::Zero(m, d);
  for (const Block& b : blocks)
    for (size_t i = 0; i < b.rows.size(); ++i)
      out.block(b.rows[i], b.col0, 1, b.values.cols()) = b.values.row(i);
  return out;
}

CVec apply_sparse(const RowSparsePrecoder& p, const CVec& s, MultiplyCounter* counter) {
  if (static_cast<int>(s.size()) != p.d)
    throw std::invalid_argument("apply_sparse: symbol length must equal stream count");
  CVec y = CVec::Zero(p.m);
  for (const RowSparsePrecoder::Block& b : p.blocks) {
    const auto s_k = s.segment(b.col0, b.values.cols());
    const CVec contrib = b.values * s_k;
    for (size_t i = 0; i < b.rows.size(); ++i) {
      if (b.rows[i] < 0 || b.rows[i] >= p.m)
        throw std::out_of_range("apply_sparse: row index out of range");
      y(b.rows[i]) += contrib(i);
    }
    if (counter)
      counter->angle_stage += static_cast<std::uint64_t>(b.rows.size()) * b.values.cols();
  }
  return ifft_unitary(y, counter);
}

CostReport measured_vs_model(const PrecoderSolution& sol, const ResourceGrid& grid,
                             int trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("measured_vs_model: trials must be >= 1");
  const RowSparsePrecoder sparse = RowSparsePrecoder::from_solution(sol);
  const int m = sparse.m;
  const int d = sparse.d;
  const int k_s = sol.deltas.front().K_s;
  CostReport rep = cost_model(m, d, k_s, grid);
  rep.trials = trials;

  const CMat p_ant = sol.aggregate_ant();
  MultiplyCounter counter;
  Rng rng(seed);
  for (int t = 0; t < trials; ++t) {
    const CVec s = rng.cnormal_vector(d);
    const CVec x_dense = apply_dense(p_ant, s, &counter);
    const CVec x_sparse = apply_sparse(sparse, s, &counter);
    const double scale = std::max(x_dense.norm(), 1e-300);
    if ((x_dense - x_sparse).norm() / scale > 1e-10)
      throw std::runtime_error("measured_vs_model: apply paths disagree");
  }
  rep.measured_dense_per_symbol = counter.dense_stage / trials;
  rep.measured_angle_per_symbol = counter.angle_stage / trials;
  rep.measured_fft_per_symbol = counter.fft_stage / trials;
  rep.measured_fft_nontrivial_per_symbol = counter.fft_nontrivial / trials;
  return rep;
}

std::string CostReport::to_json() const {
  nlohmann::ordered_json j;
  j["m"] = m;
  j["d"] = d;
  j["k_s"] = k_s;
  j["n_sym"] = n_sym;
  j["dense_per_symbol"] = dense_per_symbol;
  j["sparse_per_symbol"] = sparse_per_symbol;
  j["dense_total"] = dense_total;
  j["sparse_total"] = sparse_total;
  j["reduction_fraction"] = reduction_fraction;
  j["power_of_two_fft"] = power_of_two_fft;
  j["sparse_beneficial"] = sparse_beneficial;
  j["trials"] = trials;
  j["measured_dense_per_symbol"] = measured_dense_per_symbol;
  j["measured_angle_per_symbol"] = measured_angle_per_symbol;
  j["measured_fft_per_symbol"] = measured_fft_per_symbol;
  j["measured_fft_nontrivial_per_symbol"] = measured_fft_nontrivial_per_symbol;
  return j.dump(2);
}

}  // namespace beamsparse

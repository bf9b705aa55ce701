#include "beamsparse/oracle.hpp"

#include <cmath>
#include <stdexcept>

#include "beamsparse/aullsp.hpp"
#include "beamsparse/wmmse_dense.hpp"

namespace beamsparse {

namespace {

constexpr int kOracleIters = 200;
constexpr double kOracleTol = 1e-8;

bool support_less(const std::vector<std::vector<int>>& a,
                  const std::vector<std::vector<int>>& b) {
  return a < b;  // lexicographic over users then indices
}

}  // namespace

long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  long long c = 1;
  for (int i = 1; i <= k; ++i) {
    c = c * (n - k + i) / i;
    if (c > (1LL << 40)) return 1LL << 40;  // saturate; only used for budgeting
  }
  return c;
}

std::vector<std::vector<int>> enumerate_subsets(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(k);
  for (int i = 0; i < k; ++i) cur[i] = i;
  while (true) {
    out.push_back(cur);
    int i = k - 1;
    while (i >= 0 && cur[i] == n - k + i) --i;
    if (i < 0) break;
    ++cur[i];
    for (int j = i + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
  }
  return out;
}

OracleResult exhaustive_beam_search(const SystemConfig& cfg, const ChannelSet& ch,
                                    long max_supports) {
  cfg.validate();
  require_common_support_feasible(cfg);
  if (binomial(cfg.M, cfg.K_s) > max_supports)
    throw std::invalid_argument("exhaustive_beam_search: combinatorial budget exceeded");

  const DensePrecoder init = matched_filter_init(ch, cfg);
  OracleResult res;
  for (const auto& sup : enumerate_subsets(cfg.M, cfg.K_s)) {
    const auto [precoder, trace] =
        wmmse_on_support(cfg, ch, sup, init, kOracleIters, kOracleTol);
    const double wsr = rate_report(ch, precoder.V, cfg).wsr_bits;
    SupportEntry entry{{sup}, wsr};
    if (res.table.empty() || entry.wsr_bits > res.best.wsr_bits ||
        (entry.wsr_bits == res.best.wsr_bits && support_less(entry.supports, res.best.supports)))
      res.best = entry;
    res.table.push_back(std::move(entry));
  }
  return res;
}

OracleResult exhaustive_user_beam_search(const SystemConfig& cfg, const ChannelSet& ch,
                                         long max_supports) {
  cfg.validate();
  double budget = 1.0;
  for (int k = 0; k < cfg.K; ++k) budget *= static_cast<double>(binomial(cfg.M, cfg.K_s));
  if (budget > static_cast<double>(max_supports))
    throw std::invalid_argument("exhaustive_user_beam_search: combinatorial budget exceeded");

  const std::vector<std::vector<int>> subsets = enumerate_subsets(cfg.M, cfg.K_s);
  const long n_sub = static_cast<long>(subsets.size());
  long total = 1;
  for (int k = 0; k < cfg.K; ++k) total *= n_sub;

  SparseOptions opt;
  opt.max_iter = kOracleIters;
  opt.tol = kOracleTol;
  opt.freeze_selection = true;

  OracleResult res;
  std::vector<int> pick(cfg.K, 0);
  for (long idx = 0; idx < total; ++idx) {
    long rem = idx;
    for (int k = cfg.K - 1; k >= 0; --k) {
      pick[k] = static_cast<int>(rem % n_sub);
      rem /= n_sub;
    }
    AullspState st = aullsp_init(cfg, ch);
    SupportEntry entry;
    entry.supports.resize(cfg.K);
    for (int k = 0; k < cfg.K; ++k) {
      entry.supports[k] = subsets[pick[k]];
      st.delta[k] = SelectionVector::from_support(cfg.M, entry.supports[k]);
    }
    const auto [sol, trace] = aullsp_solve(cfg, ch, st, opt);
    entry.wsr_bits = rate_report(ch, sol.P, cfg).wsr_bits;
    if (res.table.empty() || entry.wsr_bits > res.best.wsr_bits ||
        (entry.wsr_bits == res.best.wsr_bits && support_less(entry.supports, res.best.supports)))
      res.best = entry;
    res.table.push_back(std::move(entry));
  }
  return res;
}

double finite_diff_check(const std::function<double(const RVec&)>& fn,
                         const std::function<RVec(const RVec&)>& grad,
                         const RVec& point, double step) {
  if (step <= 0.0) throw std::invalid_argument("finite_diff_check: step must be positive");
  const RVec g = grad(point);
  RVec fd(point.size());
  for (Eigen::Index i = 0; i < point.size(); ++i) {
    RVec p_hi = point, p_lo = point;
    p_hi(i) += step;
    p_lo(i) -= step;
    fd(i) = (fn(p_hi) - fn(p_lo)) / (2.0 * step);
  }
  const double scale = std::max(fd.cwiseAbs().maxCoeff(), 1e-12);
  return (g - fd).cwiseAbs().maxCoeff() / scale;
}

ProjectRescaleResult project_and_rescale(const std::vector<CMat>& precoders,
                                         const std::vector<SelectionVector>& supports,
                                         const ChannelSet& ch, const SystemConfig& cfg) {
  if (precoders.empty()) throw std::invalid_argument("project_and_rescale: no precoders");
  const bool common = supports.size() == 1;
  if (!common && supports.size() != precoders.size())
    throw std::invalid_argument("project_and_rescale: one support, or one per user");

  ProjectRescaleResult out;
  out.wsr_before = rate_report(ch, precoders, cfg).wsr_bits;

  out.projected.resize(precoders.size());
  double projected_power = 0.0;
  for (size_t k = 0; k < precoders.size(); ++k) {
    const SelectionVector& delta = common ? supports.front() : supports[k];
    const CMat basis = support_subspace_basis(ch, delta);
    if (basis.cols() < std::min<Eigen::Index>(delta.K_s, ch.H_all.rows()))
      out.rank_deficient = true;
    const CMat a = basis * (basis.adjoint() * precoders[k]);
    const CMat b = precoders[k] - a;
    const double scale = std::max(precoders[k].norm(), 1e-300);
    out.max_null_residual =
        std::max(out.max_null_residual, (ch.H_all * b).norm() / scale);
    out.projected[k] = a;
    projected_power += a.squaredNorm();
  }
  if (projected_power <= 0.0)
    throw std::invalid_argument("project_and_rescale: projection annihilated all power");
  out.eta = std::sqrt(cfg.P_max / projected_power);
  for (auto& a : out.projected) a *= out.eta;
  out.wsr_after = rate_report(ch, out.projected, cfg).wsr_bits;
  return out;
}

}  // namespace beamsparse

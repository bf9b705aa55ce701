#include "beamsparse/precoder.hpp"

#include <Eigen/QR>
#include <stdexcept>

namespace beamsparse {

double PrecoderSolution::total_power() const {
  double p = 0.0;
  for (const auto& pk : P) p += pk.squaredNorm();
  return p;
}

CMat PrecoderSolution::aggregate() const {
  Eigen::Index d = 0;
  for (const auto& pk : P) d += pk.cols();
  CMat agg(P.front().rows(), d);
  Eigen::Index c = 0;
  for (const auto& pk : P) {
    agg.middleCols(c, pk.cols()) = pk;
    c += pk.cols();
  }
  return agg;
}

CMat PrecoderSolution::aggregate_ant() const {
  Eigen::Index d = 0;
  for (const auto& pk : P_ant) d += pk.cols();
  CMat agg(P_ant.front().rows(), d);
  Eigen::Index c = 0;
  for (const auto& pk : P_ant) {
    agg.middleCols(c, pk.cols()) = pk;
    c += pk.cols();
  }
  return agg;
}

CMat support_subspace_basis(const ChannelSet& ch, const SelectionVector& delta) {
  const std::vector<int> sup = delta.support();
  const int m = delta.M();
  // Support-compressed basis generator: rows of H^H on the support,
  // i.e. H_all(:, sup)^H, size K_s x N.
  CMat gen(sup.size(), ch.H_all.rows());
  for (size_t i = 0; i < sup.size(); ++i)
    gen.row(i) = ch.H_all.col(sup[i]).adjoint();
  Eigen::ColPivHouseholderQR<CMat> qr(gen);
  const Eigen::Index rank = qr.rank();
  CMat q = qr.householderQ() * CMat::Identity(gen.rows(), rank);
  CMat basis = CMat::Zero(m, rank);
  for (size_t i = 0; i < sup.size(); ++i) basis.row(sup[i]) = q.row(i);
  return basis;
}

double projection_residual(const PrecoderSolution& sol, const ChannelSet& ch) {
  double worst = 0.0;
  for (size_t k = 0; k < sol.P.size(); ++k) {
    const SelectionVector& delta = sol.common_support ? sol.deltas.front() : sol.deltas[k];
    const CMat basis = support_subspace_basis(ch, delta);
    const CMat resid = sol.P[k] - basis * (basis.adjoint() * sol.P[k]);
    const double denom = sol.P[k].norm();
    if (denom > 0.0) worst = std::max(worst, resid.norm() / denom);
  }
  return worst;
}

}  // namespace beamsparse

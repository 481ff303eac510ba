#include "glmmsel/covariance.hpp"

#include <cmath>
#include <numeric>

#include "glmmsel/errors.hpp"

namespace glmmsel {

double CovarianceState::total_logdet() const noexcept {
  return std::accumulate(clusters_.begin(), clusters_.end(), 0.0,
                         [](double acc, const ClusterCovariance& c) { return acc + c.logdet; });
}

ClusterCovariance build_cluster_covariance(const ClusterData& cluster, const Eigen::VectorXd& gamma) {
  const Index n = cluster.size();
  Eigen::MatrixXd V = cluster.w.cwiseInverse().asDiagonal();
  for (Index k = 0; k < gamma.size(); ++k) {
    if (gamma[k] > 0.0) {
      V.selfadjointView<Eigen::Lower>().rankUpdate(cluster.X.col(k), gamma[k]);
    }
  }
  V.triangularView<Eigen::StrictlyUpper>() = V.transpose();

  Eigen::LLT<Eigen::MatrixXd> llt(V);
  if (llt.info() != Eigen::Success) {
    raise(ErrorKind::NonPositiveDefinite, "covariance of cluster '" + cluster.id +
                                              "' is not positive definite");
  }
  ClusterCovariance out;
  out.inv = llt.solve(Eigen::MatrixXd::Identity(n, n));
  out.inv = 0.5 * (out.inv + out.inv.transpose()).eval();
  const Eigen::MatrixXd& L = llt.matrixLLT();
  double logdet = 0.0;
  for (Index j = 0; j < n; ++j) logdet += std::log(L(j, j));
  out.logdet = 2.0 * logdet;
  return out;
}

CovarianceState build_state(const Dataset& data, const Eigen::VectorXd& gamma) {
  if (gamma.size() != data.p()) raise(ErrorKind::InvalidConfig, "gamma length does not match p");
  if ((gamma.array() < 0.0).any()) raise(ErrorKind::InvalidConfig, "gamma must be nonnegative");
  std::vector<ClusterCovariance> clusters;
  clusters.reserve(static_cast<std::size_t>(data.m()));
  for (const auto& c : data.clusters()) clusters.push_back(build_cluster_covariance(c, gamma));
  return CovarianceState(std::move(clusters), gamma);
}

void rank_one_update(CovarianceState& state, const Dataset& data, Index k, double delta) {
  if (delta == 0.0) return;
  std::vector<Eigen::VectorXd> projected;
  projected.reserve(static_cast<std::size_t>(data.m()));
  for (Index i = 0; i < data.m(); ++i) {
    projected.push_back(state.cluster(i).inv * data.cluster(i).X.col(k));
  }
  rank_one_update(state, data, k, delta, projected);
}

void rank_one_update(CovarianceState& state, const Dataset& data, Index k, double delta,
                     std::span<const Eigen::VectorXd> projected) {
  if (delta == 0.0) return;
  const double next = state.gamma_[k] + delta;
  if (next < 0.0) {
    raise(ErrorKind::InvalidConfig, "update would make gamma negative");
  }
  const auto m = static_cast<std::size_t>(data.m());

  // Validate every cluster before touching any of them.
  std::vector<double> quad(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto x = data.clusters()[i].X.col(k);
    quad[i] = x.dot(projected[i]);
    const double denom = 1.0 / delta + quad[i];
    if (std::abs(denom) < 1e-12 || 1.0 + delta * quad[i] <= 0.0) {
      raise(ErrorKind::SingularUpdate, "rank-one update of predictor " + std::to_string(k) +
                                           " is ill-conditioned in cluster '" +
                                           data.clusters()[i].id + "'");
    }
  }

  state.gamma_[k] = next;
  for (std::size_t i = 0; i < m; ++i) {
    auto& c = state.clusters_[i];
    const double scale = delta / (1.0 + delta * quad[i]);
    // u u^T is exactly symmetric in floating point, so inv stays symmetric.
    c.inv.noalias() -= scale * projected[i] * projected[i].transpose();
    c.logdet += std::log1p(delta * quad[i]);
    if (++c.edits >= kDriftRebuildEdits) {
      c = build_cluster_covariance(data.clusters()[i], state.gamma_);
    }
  }
}

}  // namespace glmmsel

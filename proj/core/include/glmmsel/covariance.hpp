#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "glmmsel/dataset.hpp"

namespace glmmsel {

/// Inverse and log-determinant of V_i(gamma) = diag(1/w_i) + X_i diag(gamma) X_i^T.
struct ClusterCovariance {
  Eigen::MatrixXd inv;
  double logdet = 0.0;
  std::size_t edits = 0;  // rank-one edits since the last dense build
};

/// Number of rank-one edits after which a cluster is rebuilt from scratch.
inline constexpr std::size_t kDriftRebuildEdits = 10000;

class CovarianceState {
 public:
  CovarianceState() = default;
  CovarianceState(std::vector<ClusterCovariance> clusters, Eigen::VectorXd gamma)
      : clusters_(std::move(clusters)), gamma_(std::move(gamma)) {}

  std::span<const ClusterCovariance> clusters() const noexcept { return clusters_; }
  const ClusterCovariance& cluster(Index i) const { return clusters_[static_cast<std::size_t>(i)]; }
  const Eigen::VectorXd& gamma() const noexcept { return gamma_; }
  double total_logdet() const noexcept;

 private:
  friend void rank_one_update(CovarianceState&, const Dataset&, Index, double,
                              std::span<const Eigen::VectorXd>);

  std::vector<ClusterCovariance> clusters_;
  Eigen::VectorXd gamma_;
};

/// Dense O(n_i^3) construction; raises NonPositiveDefinite if a factorization fails.
ClusterCovariance build_cluster_covariance(const ClusterData& cluster, const Eigen::VectorXd& gamma);
CovarianceState build_state(const Dataset& data, const Eigen::VectorXd& gamma);

/// Changes gamma_k by `delta` in every cluster with a Sherman-Morrison update of
/// the inverse and a matrix-determinant-lemma update of the log-determinant.
/// Either every cluster is updated or (on SingularUpdate) none is.
void rank_one_update(CovarianceState& state, const Dataset& data, Index k, double delta);

/// Same, reusing precomputed products V_i^{-1} x_ik (one per cluster).
void rank_one_update(CovarianceState& state, const Dataset& data, Index k, double delta,
                     std::span<const Eigen::VectorXd> projected);

}  // namespace glmmsel

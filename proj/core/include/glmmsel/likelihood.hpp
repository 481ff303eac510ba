#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "glmmsel/covariance.hpp"
#include "glmmsel/dataset.hpp"

namespace glmmsel {

/// Current parameters plus the cached quantities the profiled likelihood needs.
struct ModelFit {
  Eigen::VectorXd beta;
  Eigen::VectorXd gamma;
  double sigma2_hat = 0.0;
  std::vector<Eigen::VectorXd> residuals;           // r_i = y_i - X_i beta
  std::vector<Eigen::VectorXd> weighted_residuals;  // V_i^{-1} r_i
  double quad = 0.0;                                // S = sum_i r_i^T V_i^{-1} r_i
  double objective_nll = 0.0;
  Index n_total = 0;

  Coefficients coefficients() const { return {beta, gamma}; }
};

/// Builds residual caches for (beta, gamma); `state` must reflect gamma.
ModelFit make_fit(const Dataset& data, const CovarianceState& state, Eigen::VectorXd beta,
                  Eigen::VectorXd gamma);

/// Recomputes residuals, V^{-1} r, S, sigma2_hat and the likelihood from beta.
void refresh_fit(ModelFit& fit, const Dataset& data, const CovarianceState& state);

/// Recomputes V^{-1} r, S and the likelihood from the stored residuals.
void refresh_weighted(ModelFit& fit, const CovarianceState& state);

/// Profiled negative log-likelihood  sum_i log det V_i + n log S.
/// Raises DegenerateFit when S <= 1e-300.
double neg_log_likelihood(const ModelFit& fit, const CovarianceState& state);

/// Maximum-likelihood noise variance S / n.
double profiled_sigma2(const ModelFit& fit, const CovarianceState& state);

struct BlockGradient {
  double beta = 0.0;
  double gamma = 0.0;
};

/// Partial derivatives of the profiled likelihood in (beta_k, gamma_k).
BlockGradient grad_block(const Dataset& data, const ModelFit& fit, const CovarianceState& state,
                         Index k);

/// Best linear unbiased predictors diag(gamma) X_i^T V_i^{-1} r_i, one length-p
/// vector per cluster.
std::vector<Eigen::VectorXd> blup(const Dataset& data, const ModelFit& fit,
                                  const CovarianceState& state);

/// The profiled likelihood as a function of a single block's offsets
/// (d_beta, d_gamma) from the current point, all other coordinates fixed.
///
/// With u_i = V_i^{-1} x_ik, q_i = x_ik^T u_i and a_i = u_i^T r_i:
///   S(d_b, d_g) = S - sum_i [2 d_b a_i - d_b^2 q_i + d_g (a_i - d_b q_i)^2 / (1 + d_g q_i)]
///   log det     = log det + sum_i log(1 + d_g q_i)
/// so every evaluation is O(m) once the per-cluster scalars are known.
class BlockLikelihood {
 public:
  BlockLikelihood() = default;
  BlockLikelihood(double quad, double logdet, Index n_total, std::vector<double> q,
                  std::vector<double> a);

  /// Resets the base point, keeping the vector capacity.
  void reset(double quad, double logdet, Index n_total, Index clusters);
  std::vector<double>& q() noexcept { return q_; }
  std::vector<double>& a() noexcept { return a_; }
  const std::vector<double>& q() const noexcept { return q_; }
  const std::vector<double>& a() const noexcept { return a_; }

  double quad() const noexcept { return quad_; }
  double logdet() const noexcept { return logdet_; }
  double n_total() const noexcept { return n_; }
  double value() const;
  BlockGradient gradient() const;

  /// Change of the likelihood at the offset; +inf when the offset leaves the
  /// domain (non-positive S or covariance).
  double delta(double d_beta, double d_gamma) const;

  /// Moves the base point by the offset.
  void shift(double d_beta, double d_gamma);

 private:
  double quad_ = 0.0;
  double logdet_ = 0.0;
  double n_ = 0.0;
  std::vector<double> q_;
  std::vector<double> a_;
};

}  // namespace glmmsel

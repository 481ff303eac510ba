#include "glmmsel/dataset.hpp"

#include <cmath>

#include "glmmsel/errors.hpp"

namespace glmmsel {

std::string_view to_string(Family family) noexcept {
  switch (family) {
    case Family::Gaussian: return "gaussian";
    case Family::Bernoulli: return "bernoulli";
    case Family::Poisson: return "poisson";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  if (name == "gaussian") return Family::Gaussian;
  if (name == "bernoulli") return Family::Bernoulli;
  if (name == "poisson") return Family::Poisson;
  raise(ErrorKind::InvalidConfig, "unknown family '" + std::string(name) + "'");
}

Dataset::Dataset(std::vector<ClusterData> clusters, Family family)
    : clusters_(std::move(clusters)), family_(family) {
  validate();
  scales_ = Eigen::VectorXd::Ones(p_);
}

Dataset::Dataset(std::vector<ClusterData> clusters, Family family, Eigen::VectorXd scales)
    : clusters_(std::move(clusters)), family_(family), scales_(std::move(scales)) {
  validate();
  if (scales_.size() != p_) {
    raise(ErrorKind::InvalidConfig, "scales length does not match predictor count");
  }
  if ((scales_.array() <= 0.0).any()) {
    raise(ErrorKind::InvalidConfig, "scales must be positive");
  }
}

void Dataset::validate() {
  if (clusters_.empty()) raise(ErrorKind::EmptyDataset, "dataset has no clusters");
  p_ = clusters_.front().X.cols();
  n_total_ = 0;
  for (auto& c : clusters_) {
    if (c.size() < 1) raise(ErrorKind::EmptyCluster, "cluster '" + c.id + "' has no observations");
    if (c.X.rows() != c.size() || c.X.cols() != p_) {
      raise(ErrorKind::InvalidConfig, "cluster '" + c.id + "' has inconsistent dimensions");
    }
    if (c.w.size() == 0) c.w = Eigen::VectorXd::Ones(c.size());
    if (c.w.size() != c.size()) {
      raise(ErrorKind::InvalidConfig, "cluster '" + c.id + "' weight length mismatch");
    }
    if (!(c.w.array() > 0.0).all()) {
      raise(ErrorKind::InvalidConfig, "cluster '" + c.id + "' has non-positive weights");
    }
    if (!c.y.allFinite() || !c.X.allFinite()) {
      raise(ErrorKind::InvalidConfig, "cluster '" + c.id + "' has non-finite values");
    }
    if (family_ == Family::Bernoulli) {
      for (Index j = 0; j < c.size(); ++j) {
        if (c.y[j] != 0.0 && c.y[j] != 1.0) {
          raise(ErrorKind::NonBinaryResponse,
                "cluster '" + c.id + "' has response " + std::to_string(c.y[j]));
        }
      }
    }
    n_total_ += c.size();
  }
}

Dataset Dataset::with_responses(std::span<const Eigen::VectorXd> y,
                                std::span<const Eigen::VectorXd> w, Family family) const {
  if (y.size() != clusters_.size() || w.size() != clusters_.size()) {
    raise(ErrorKind::InvalidConfig, "response/weight cluster count mismatch");
  }
  std::vector<ClusterData> out = clusters_;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].y = y[i];
    out[i].w = w[i];
  }
  return Dataset(std::move(out), family, scales_);
}

Index Dataset::find_cluster(const std::string& id) const {
  for (std::size_t i = 0; i < clusters_.size(); ++i) {
    if (clusters_[i].id == id) return static_cast<Index>(i);
  }
  return -1;
}

Dataset apply_scales(const Dataset& raw, const Eigen::VectorXd& scales) {
  if (scales.size() != raw.p()) {
    raise(ErrorKind::InvalidConfig, "scale vector length does not match predictor count");
  }
  std::vector<ClusterData> out(raw.clusters().begin(), raw.clusters().end());
  const Eigen::VectorXd inv = scales.cwiseInverse();
  for (auto& c : out) c.X = c.X * inv.asDiagonal();
  return Dataset(std::move(out), raw.family(), raw.scales().cwiseProduct(scales));
}

Dataset standardize(const Dataset& raw) {
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(raw.p());
  for (const auto& c : raw.clusters()) sq += c.X.colwise().squaredNorm().transpose();
  Eigen::VectorXd norms = sq.cwiseSqrt();
  for (Index k = 0; k < raw.p(); ++k) {
    if (norms[k] < 1e-12) {
      raise(ErrorKind::ZeroVarianceColumn, "predictor column " + std::to_string(k) + " has zero norm");
    }
  }
  return apply_scales(raw, norms);
}

Coefficients to_original_scale(const Coefficients& standardized, const Eigen::VectorXd& scales) {
  return {standardized.beta.cwiseQuotient(scales),
          standardized.gamma.cwiseQuotient(scales.cwiseAbs2())};
}

Coefficients to_standardized_scale(const Coefficients& original, const Eigen::VectorXd& scales) {
  return {original.beta.cwiseProduct(scales), original.gamma.cwiseProduct(scales.cwiseAbs2())};
}

std::vector<Eigen::VectorXd> true_linear_predictor(const Dataset& data, const GroundTruth& truth) {
  if (static_cast<std::size_t>(data.m()) > truth.u.size()) {
    raise(ErrorKind::InvalidConfig, "dataset has more clusters than the ground truth");
  }
  std::vector<Eigen::VectorXd> eta;
  eta.reserve(static_cast<std::size_t>(data.m()));
  // Raw-scale truth applies to raw predictors: X_std * diag(scale) = X_raw.
  const Eigen::VectorXd& s = data.scales();
  for (Index i = 0; i < data.m(); ++i) {
    const auto& c = data.cluster(i);
    Eigen::VectorXd coef = (truth.beta0 + truth.u[static_cast<std::size_t>(i)]).cwiseProduct(s);
    eta.push_back(c.X * coef);
  }
  return eta;
}

}  // namespace glmmsel

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace glmmsel {

using Index = Eigen::Index;

enum class Family { Gaussian, Bernoulli, Poisson };

std::string_view to_string(Family family) noexcept;
Family parse_family(std::string_view name);

/// Observations for one cluster. `w` holds observation weights, all ones for
/// raw Gaussian data and the working weights inside the quasi-likelihood loop.
struct ClusterData {
  std::string id;
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  Eigen::VectorXd w;

  Index size() const noexcept { return y.size(); }
};

/// Fixed effects and random-effect variances for every predictor.
struct Coefficients {
  Eigen::VectorXd beta;
  Eigen::VectorXd gamma;

  static Coefficients zeros(Index p) {
    return {Eigen::VectorXd::Zero(p), Eigen::VectorXd::Zero(p)};
  }
};

/// Clustered regression data. Immutable once built; every constructor path
/// validates dimensions, weights and (for Bernoulli) the response coding.
class Dataset {
 public:
  Dataset(std::vector<ClusterData> clusters, Family family);
  Dataset(std::vector<ClusterData> clusters, Family family, Eigen::VectorXd scales);

  std::span<const ClusterData> clusters() const noexcept { return clusters_; }
  const ClusterData& cluster(Index i) const { return clusters_[static_cast<std::size_t>(i)]; }
  Index m() const noexcept { return static_cast<Index>(clusters_.size()); }
  Index p() const noexcept { return p_; }
  Index n_total() const noexcept { return n_total_; }
  Family family() const noexcept { return family_; }

  /// Column norms divided out by standardize(); ones for raw data.
  const Eigen::VectorXd& scales() const noexcept { return scales_; }

  /// Copy with responses and weights replaced, X and scales shared by value.
  Dataset with_responses(std::span<const Eigen::VectorXd> y,
                         std::span<const Eigen::VectorXd> w, Family family) const;

  /// Index of the cluster with the given id, or -1.
  Index find_cluster(const std::string& id) const;

 private:
  void validate();

  std::vector<ClusterData> clusters_;
  Family family_;
  Index p_ = 0;
  Index n_total_ = 0;
  Eigen::VectorXd scales_;
};

/// Divides every predictor column by its full-sample l2 norm.
Dataset standardize(const Dataset& raw);

/// Applies previously computed scales (e.g. training scales to validation data).
Dataset apply_scales(const Dataset& raw, const Eigen::VectorXd& scales);

/// Maps standardized-scale coefficients back to raw predictors:
/// beta_k / scale_k and gamma_k / scale_k^2.
Coefficients to_original_scale(const Coefficients& standardized, const Eigen::VectorXd& scales);
Coefficients to_standardized_scale(const Coefficients& original, const Eigen::VectorXd& scales);

struct GroundTruth {
  Eigen::VectorXd beta0;
  Eigen::VectorXd gamma0;
  std::vector<Eigen::VectorXd> u;  // per cluster, length p
  double sigma2 = 0.0;             // Gaussian noise variance; 0 for Bernoulli
};

struct SimConfig {
  Index n_total = 1000;
  Index p = 1000;
  Index s_fixed = 5;
  Index s_random = 3;
  double rho = 0.5;
  Family family = Family::Gaussian;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SyntheticData {
  Dataset data;
  GroundTruth truth;
};

/// Draws a dataset from the AR(1)-correlated design with unit fixed effects on a
/// random support and unit-variance random effects on a subset of it. Gaussian
/// noise is set so the realized linear predictor has signal-to-noise ratio one.
SyntheticData generate_synthetic(const SimConfig& cfg);

/// Training, validation and test samples that share clusters (and therefore
/// random-effect draws) and noise variance.
struct SyntheticStudy {
  Dataset train;
  Dataset validation;
  Dataset test;
  GroundTruth truth;
};

SyntheticStudy generate_study(const SimConfig& cfg);

/// True linear predictor X_i (beta0 + u_i) for each cluster of `data`, matching
/// clusters to the truth by position in the generator's cluster order.
std::vector<Eigen::VectorXd> true_linear_predictor(const Dataset& data, const GroundTruth& truth);

struct CsvSchema {
  std::string cluster_col;
  std::string response_col;
  std::vector<std::string> predictor_cols;  // empty: every other column
};

/// Long-format CSV (one row per observation) grouped by cluster id in order of
/// first appearance. The result is not standardized.
Dataset load_csv(const std::string& path, const CsvSchema& schema,
                 Family family = Family::Gaussian);

/// Writes `data` (raw scale) in the long format read by load_csv.
void write_csv(const std::string& path, const Dataset& data, const std::string& cluster_col = "cluster",
               const std::string& response_col = "y");

}  // namespace glmmsel

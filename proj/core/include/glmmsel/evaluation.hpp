#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "glmmsel/dataset.hpp"
#include "glmmsel/path.hpp"

namespace glmmsel {

/// sum ||truth_i - fitted_i||^2 / sum ||truth_i||^2. Raises NullTruth when the
/// denominator is below 1e-300.
double prediction_error(std::span<const Eigen::VectorXd> truth, std::span<const Eigen::VectorXd> fitted);

/// 2 TP / (2 TP + FP + FN), and 1 when all three counts are zero.
double f1_score(std::size_t tp, std::size_t fp, std::size_t fn);

struct SelectionScores {
  double sparsity = 0.0;
  double f1_effect_type = 0.0;
  double f1_nonzero = 0.0;
};

/// Each predictor has a role: none, fixed only, or fixed plus random. The
/// effect-type score counts a selected predictor as correct only when its role
/// matches the truth; the nonzero score ignores roles.
SelectionScores selection_scores(const GroundTruth& truth, const Coefficients& fit);

/// Linear predictor X_i (beta + u_i) of each cluster in `data`. Clusters whose
/// id appears in `cluster_ids` use the matching BLUP; others use beta alone.
std::vector<Eigen::VectorXd> fitted_linear_predictor(const Dataset& data, const PathEntry& entry,
                                                     std::span<const std::string> cluster_ids);

/// Mean validation loss: squared error (Gaussian) or cross-entropy (Bernoulli).
double validation_loss(const Dataset& validation, const PathEntry& entry,
                       std::span<const std::string> cluster_ids, Family family);

struct TuneResult {
  std::size_t slice = 0;
  std::size_t entry = 0;
  double loss = 0.0;
  std::vector<std::vector<double>> losses;  // [slice][entry]

  const PathEntry& chosen(const PathResult& path) const { return path.slices[slice].entries[entry]; }
};

/// Minimizes validation loss over every path entry; ties go to the smaller
/// active set, then the larger lambda. Raises EmptyPath when no entry exists.
TuneResult tune(const PathResult& path, const Dataset& validation);

enum class Method { Cd, CdLs };
std::string_view to_string(Method method) noexcept;
Method parse_method(std::string_view name);

struct ExperimentCell {
  Index n_total = 1000;
  Index p = 100;
  double rho = 0.5;
  Family family = Family::Gaussian;
  Method method = Method::Cd;
  Index s_fixed = 5;
  Index s_random = 3;
};

struct ExperimentSpec {
  std::vector<ExperimentCell> cells;
  int replicates = 1;
  std::uint64_t seed = 1;
  PathConfig path;  // local_search is set per cell from its method
  int threads = 1;
};

struct ReplicateResult {
  bool ok = false;
  std::string error;
  double prediction_error = 0.0;
  double f1_effect_type = 0.0;
  double f1_nonzero = 0.0;
  double sparsity = 0.0;
  double seconds = 0.0;
  double lambda = 0.0;
  double alpha = 0.0;
};

struct MetricSummary {
  std::string metric;
  double mean = 0.0;
  double se = 0.0;
  int n = 0;
};

struct CellResult {
  ExperimentCell cell;
  std::vector<ReplicateResult> replicates;
  std::vector<MetricSummary> metrics;
  double seconds_mean = 0.0;
  int failures = 0;

  const MetricSummary& metric(std::string_view name) const;
};

struct ExperimentResult {
  std::vector<CellResult> cells;
};

/// Metric names in table order.
std::span<const std::string_view> experiment_metrics() noexcept;

/// Seed of replicate r. Shared by every cell so methods see the same data.
std::uint64_t replicate_seed(std::uint64_t seed, int replicate) noexcept;

/// One replicate: simulate train, validation and test samples, fit the path,
/// tune on validation and score the chosen fit on the test sample.
ReplicateResult run_replicate(const ExperimentCell& cell, const PathConfig& path, std::uint64_t seed);

/// Mean and standard error (sample sd / sqrt(replicates)) per metric and cell.
ExperimentResult run_experiment(const ExperimentSpec& spec);

}  // namespace glmmsel

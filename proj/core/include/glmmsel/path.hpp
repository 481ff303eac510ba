#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "glmmsel/dataset.hpp"
#include "glmmsel/pql.hpp"
#include "glmmsel/solver.hpp"

namespace glmmsel {

struct PathConfig {
  int n_lambda = 100;
  double c = 0.95;
  std::vector<double> alphas = default_alphas();
  bool local_search = false;
  double lambda_floor_ratio = 1e-4;
  int threads = 1;
  SolverConfig solver;  // lambda and alpha are overwritten per fit
  PqlConfig pql;

  /// Ten values equispaced on [0.1, 1].
  static std::vector<double> default_alphas();
  void validate() const;
};

/// One recorded fit. BLUPs are kept only for predictors with a random effect:
/// `blup_predictors` lists them and column j of `blups` holds predictor
/// blup_predictors[j] for every training cluster.
struct PathEntry {
  double lambda = 0.0;
  double alpha = 1.0;
  Coefficients coef;
  ActiveSet active;
  double objective = 0.0;
  double nll = 0.0;
  double sigma2 = 0.0;
  std::vector<Index> blup_predictors;
  Eigen::MatrixXd blups;
  int cycles = 0;
  int outer_iterations = 1;
  bool converged = false;

  /// Length-p BLUP vector of training cluster i.
  Eigen::VectorXd blup(Index cluster) const;
};

enum class PathStop { LengthReached, PathComplete, LambdaFloor, SizeCap, DegenerateFit, Failed };
std::string_view to_string(PathStop stop) noexcept;

struct PathSlice {
  double alpha = 1.0;
  double lambda_max = 0.0;  // first lambda; the null model is a fixed point of the solver there
  std::vector<PathEntry> entries;
  PathStop stop = PathStop::LengthReached;
  std::string error;  // message when stop is DegenerateFit or Failed
};

struct PathResult {
  std::vector<PathSlice> slices;
  PathConfig config;
  Family family = Family::Gaussian;
  Eigen::VectorXd scales;
  std::vector<std::string> cluster_ids;

  std::size_t size() const noexcept;
};

/// Largest lambda at which some inactive block would activate, scaled by c:
///   c * max_k max(g_b^2 / (2 alpha L_k), (g_b^2 + max(-g_g, 0)^2) / (2 L_k))
/// over inactive k, with L_k the step constant the solver will try first.
/// Raises PathComplete when every predictor is active.
double next_lambda(FitState& state, double alpha, double c);

/// Warm-started lambda path for every alpha, starting from the null model.
/// Successive recorded fits have distinct active sets; a fit that leaves the
/// active set unchanged is not recorded and lambda keeps decreasing.
PathResult fit_path(const Dataset& data, const PathConfig& cfg);

/// One alpha slice of fit_path.
PathSlice fit_path_slice(const Dataset& data, const PathConfig& cfg, double alpha);

}  // namespace glmmsel

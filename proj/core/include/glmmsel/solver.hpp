#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "glmmsel/covariance.hpp"
#include "glmmsel/dataset.hpp"
#include "glmmsel/likelihood.hpp"
#include "glmmsel/threshold.hpp"

namespace glmmsel {

struct LineSearchConfig {
  double initial = 1.0;  // step constant for blocks without an accepted value
  double growth = 2.0;
  int max_doublings = 50;
};

struct SolverConfig {
  double lambda = 0.0;
  double alpha = 1.0;
  int max_cycles = 100;
  double tol = 1e-5;  // relative change of the penalized objective
  std::size_t strong_set_size = 100;
  int active_stabilize_cycles = 3;
  LineSearchConfig line_search;
  BoxBounds box;
  bool record_supports = false;  // keep the active set after every cycle

  void validate() const;
};

/// Predictors with a nonzero fixed effect, ascending, and which of them also
/// carry a random effect.
struct ActiveSet {
  std::vector<Index> predictors;
  std::vector<bool> random;

  std::size_t size() const noexcept { return predictors.size(); }
  std::size_t random_count() const noexcept;
  bool contains(Index k) const noexcept;

  friend bool operator==(const ActiveSet&, const ActiveSet&) = default;
};

ActiveSet active_set(const Eigen::VectorXd& beta, const Eigen::VectorXd& gamma);

/// Penalized objective  l + lambda alpha ||beta||_0 + lambda (1 - alpha) ||gamma||_0.
double penalized_objective(double nll, const Eigen::VectorXd& beta, const Eigen::VectorXd& gamma,
                           double lambda, double alpha);

/// Per-block line-search memory. A block with an accepted step constant starts
/// its next search from half of it; other blocks start from the median of all
/// accepted constants (or the configured initial value before any exist).
class StepSizes {
 public:
  StepSizes() = default;
  StepSizes(Index p, double initial);

  double first_trial(Index k) const;
  void accept(Index k, double lbar);
  bool has_accepted(Index k) const { return accepted_[static_cast<std::size_t>(k)] != 0; }
  double accepted(Index k) const { return lbar_[static_cast<std::size_t>(k)]; }

  /// Recomputes the fallback used by blocks that never moved.
  void refresh_default();
  double fallback() const noexcept { return fallback_; }

 private:
  std::vector<double> lbar_;
  std::vector<char> accepted_;
  double initial_ = 1.0;
  double fallback_ = 1.0;
};

/// Mutable solver workspace: parameters, covariance state, residual caches and
/// step-size memory for one dataset. The dataset must outlive the state.
class FitState {
 public:
  FitState(const Dataset& data, const Coefficients& init, const LineSearchConfig& line_search = {});

  const Dataset& data() const noexcept { return *data_; }
  const ModelFit& fit() const noexcept { return fit_; }
  const CovarianceState& cov() const noexcept { return cov_; }
  StepSizes& steps() noexcept { return steps_; }
  const StepSizes& steps() const noexcept { return steps_; }

  double nll() const noexcept { return fit_.objective_nll; }
  double objective(double lambda, double alpha) const;
  Coefficients coefficients() const { return fit_.coefficients(); }
  ActiveSet active() const { return active_set(fit_.beta, fit_.gamma); }
  Index active_count() const noexcept { return active_count_; }
  bool is_active(Index k) const { return fit_.beta[k] != 0.0; }

  /// Block k's restriction of the likelihood at the current point. The
  /// projections V_i^{-1} x_ik are cached until the next mutation.
  const BlockLikelihood& project(Index k);

  /// V_i^{-1} x_ik for the block last passed to project().
  std::span<const Eigen::VectorXd> projection() const noexcept { return projected_; }

  /// Sets block k to `value`. Uses the cached projection when it is current.
  void set_block(Index k, BlockValue value);

  /// Recomputes V^{-1} r and S from the maintained inverses.
  void resync();

  /// Dense rebuild of every covariance and cache at the current parameters.
  void rebuild();

 private:
  const Dataset* data_;
  ModelFit fit_;
  CovarianceState cov_;
  StepSizes steps_;
  std::vector<Eigen::VectorXd> projected_;
  Index projected_k_ = -1;
  BlockLikelihood block_;
  Index active_count_ = 0;
};

struct BlockStep {
  bool moved = false;
  double lbar = 0.0;
  int doublings = 0;
};

/// One proximal block step: gradient step on (beta_k, gamma_k) followed by the
/// threshold, with the step constant doubled until the block descent bound
/// holds. Raises LineSearchExhausted after max_doublings.
BlockStep block_update(FitState& state, Index k, const SolverConfig& cfg);

struct CdReport {
  std::vector<double> trace;  // penalized objective, initial value then one per cycle
  int cycles = 0;
  bool converged = false;
  std::vector<ActiveSet> supports;  // filled when SolverConfig::record_supports
};

/// Coordinate descent with gradient screening, gradient sorting and active-set
/// restriction, continuing from the state's current point.
CdReport run_cd(FitState& state, const SolverConfig& cfg);

struct FitResult {
  ModelFit fit;
  std::vector<Eigen::VectorXd> blups;
  std::vector<double> trace;
  double objective = 0.0;
  int cycles = 0;
  bool converged = false;

  ActiveSet active() const { return active_set(fit.beta, fit.gamma); }
};

FitResult summarize(const FitState& state, const SolverConfig& cfg, CdReport report);

/// Coordinate descent from `init` (default: the null model).
FitResult fit_cd(const Dataset& data, const Coefficients& init, const SolverConfig& cfg);
FitResult fit_cd(const Dataset& data, const SolverConfig& cfg);

}  // namespace glmmsel

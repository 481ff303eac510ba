#pragma once

#include <memory>
#include <vector>

#include "glmmsel/dataset.hpp"
#include "glmmsel/solver.hpp"

namespace glmmsel {

/// Probabilities are clamped to [kMuClamp, 1 - kMuClamp] before forming working
/// quantities.
inline constexpr double kMuClamp = 1e-5;

struct Working {
  double z = 0.0;
  double w = 1.0;
};

/// Working response and weight of one observation linearized at `eta`.
Working working_quantities(Family family, double eta, double y);

struct PqlConfig {
  int max_iter = 50;
  double tol = 1e-4;  // max |delta beta| and |delta gamma| between outer iterations

  void validate() const;
};

struct GlmmResult {
  FitResult fit;
  int outer_iterations = 0;
  bool converged = false;
  std::vector<double> inner_objectives;  // penalized objective of each inner solve
  std::vector<std::vector<double>> inner_traces;  // per-cycle objectives of each inner solve
};

/// Outer quasi-likelihood loop with a persistent working state, so that a
/// sequence of (lambda, alpha) solves warm-starts each other. Gaussian data is
/// fitted directly, without working responses.
class GlmmSolver {
 public:
  GlmmSolver(const Dataset& data, const Coefficients& init, bool local_search = false,
             const LineSearchConfig& line_search = {});

  GlmmResult solve(const SolverConfig& cfg, const PqlConfig& pql = {});

  FitState& state() noexcept { return *state_; }
  const FitState& state() const noexcept { return *state_; }

  /// Data the inner solver currently sees (working responses for Bernoulli).
  const Dataset& working() const noexcept { return working_ ? *working_ : *data_; }

 private:
  void relinearize();

  const Dataset* data_;
  bool local_search_;
  LineSearchConfig line_search_;
  std::unique_ptr<Dataset> working_;
  std::unique_ptr<FitState> state_;
};

GlmmResult fit_glmm(const Dataset& data, const Coefficients& init, const SolverConfig& cfg,
                    const PqlConfig& pql = {}, bool local_search = false);
GlmmResult fit_glmm(const Dataset& data, const SolverConfig& cfg, const PqlConfig& pql = {},
                    bool local_search = false);

}  // namespace glmmsel

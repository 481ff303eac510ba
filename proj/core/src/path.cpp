#include "glmmsel/path.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "glmmsel/errors.hpp"
#include "glmmsel/local_search.hpp"

namespace glmmsel {

std::vector<double> PathConfig::default_alphas() {
  std::vector<double> out(10);
  for (int i = 0; i < 10; ++i) out[static_cast<std::size_t>(i)] = 0.1 + 0.1 * i;
  out.back() = 1.0;
  return out;
}

void PathConfig::validate() const {
  if (n_lambda < 1) raise(ErrorKind::InvalidConfig, "n_lambda must be positive");
  if (!(c >= 0.0 && c < 1.0)) raise(ErrorKind::InvalidConfig, "c must lie in [0, 1)");
  if (alphas.empty()) raise(ErrorKind::InvalidConfig, "alpha grid is empty");
  for (double a : alphas) {
    if (!(a > 0.0 && a <= 1.0)) raise(ErrorKind::InvalidConfig, "alpha must lie in (0, 1]");
  }
  if (!(lambda_floor_ratio >= 0.0)) raise(ErrorKind::InvalidConfig, "lambda floor ratio must be nonnegative");
  if (threads < 1) raise(ErrorKind::InvalidConfig, "threads must be positive");
  pql.validate();
}

Eigen::VectorXd PathEntry::blup(Index cluster) const {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(coef.beta.size());
  for (std::size_t j = 0; j < blup_predictors.size(); ++j) {
    u[blup_predictors[j]] = blups(cluster, static_cast<Index>(j));
  }
  return u;
}

std::string_view to_string(PathStop stop) noexcept {
  switch (stop) {
    case PathStop::LengthReached: return "length_reached";
    case PathStop::PathComplete: return "path_complete";
    case PathStop::LambdaFloor: return "lambda_floor";
    case PathStop::SizeCap: return "size_cap";
    case PathStop::DegenerateFit: return "degenerate_fit";
    case PathStop::Failed: return "failed";
  }
  return "unknown";
}

std::size_t PathResult::size() const noexcept {
  std::size_t n = 0;
  for (const auto& s : slices) n += s.entries.size();
  return n;
}

double next_lambda(FitState& state, double alpha, double c) {
  const Index p = state.data().p();
  double best = 0.0;
  bool any = false;
  for (Index k = 0; k < p; ++k) {
    if (state.is_active(k)) continue;
    any = true;
    const BlockGradient g = state.project(k).gradient();
    const double lbar = state.steps().first_trial(k);
    const double gb2 = g.beta * g.beta;
    const double down = std::max(-g.gamma, 0.0);
    best = std::max({best, gb2 / (2.0 * alpha * lbar), (gb2 + down * down) / (2.0 * lbar)});
  }
  if (!any) raise(ErrorKind::PathComplete, "every predictor is active");
  return c * best;
}

namespace {

// Smallest lambda at which no single-block insertion improves the current fit
// once the inserted block is optimized exactly.
double insertion_lambda(FitState& state, double alpha) {
  double best = 0.0;
  for (Index k = 0; k < state.data().p(); ++k) {
    if (state.is_active(k)) continue;
    const BlockLikelihood& block = state.project(k);
    double sum_a = 0.0;
    double sum_q = 0.0;
    for (std::size_t i = 0; i < block.q().size(); ++i) {
      sum_a += block.a()[i];
      sum_q += block.q()[i];
    }
    if (sum_q > 0.0) best = std::max(best, -block.delta(sum_a / sum_q, 0.0) / alpha);
    best = std::max(best, -best_insertion(block, 0.0, 1.0).change);
  }
  return best;
}

PathEntry make_entry(const GlmmResult& res, const FitState& state, double lambda, double alpha) {
  PathEntry e;
  e.lambda = lambda;
  e.alpha = alpha;
  e.coef = res.fit.fit.coefficients();
  e.active = res.fit.active();
  e.objective = res.fit.objective;
  e.nll = res.fit.fit.objective_nll;
  e.sigma2 = res.fit.fit.sigma2_hat;
  for (Index k = 0; k < e.coef.gamma.size(); ++k) {
    if (e.coef.gamma[k] != 0.0) e.blup_predictors.push_back(k);
  }
  const Index m = state.data().m();
  e.blups.resize(m, static_cast<Index>(e.blup_predictors.size()));
  for (Index i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < e.blup_predictors.size(); ++j) {
      e.blups(i, static_cast<Index>(j)) = res.fit.blups[static_cast<std::size_t>(i)][e.blup_predictors[j]];
    }
  }
  e.cycles = res.fit.cycles;
  e.outer_iterations = res.outer_iterations;
  e.converged = res.converged && res.fit.converged;
  return e;
}

}  // namespace

PathSlice fit_path_slice(const Dataset& data, const PathConfig& cfg, double alpha) {
  PathSlice slice;
  slice.alpha = alpha;
  SolverConfig solver_cfg = cfg.solver;
  solver_cfg.alpha = alpha;
  const Index size_cap = std::min(data.p(), data.n_total());

  try {
    GlmmSolver solver(data, Coefficients::zeros(data.p()), cfg.local_search, cfg.solver.line_search);
    // Slightly above the activation bound so the null model is a fixed point.
    double lambda = next_lambda(solver.state(), alpha, 1.0);
    if (cfg.local_search) lambda = std::max(lambda, insertion_lambda(solver.state(), alpha));
    lambda *= 1.0 + 1e-12;
    slice.lambda_max = lambda;
    const double floor = cfg.lambda_floor_ratio * lambda;

    solver_cfg.lambda = lambda;
    GlmmResult res = solver.solve(solver_cfg, cfg.pql);
    slice.entries.push_back(make_entry(res, solver.state(), lambda, alpha));
    if (lambda == 0.0) {
      slice.stop = PathStop::PathComplete;
      return slice;
    }

    while (static_cast<int>(slice.entries.size()) < cfg.n_lambda) {
      double next = 0.0;
      try {
        next = next_lambda(solver.state(), alpha, cfg.c);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::PathComplete) throw;
        slice.stop = PathStop::PathComplete;
        return slice;
      }
      lambda = std::min(next, cfg.c * lambda);
      if (lambda < floor || lambda <= 0.0) {
        slice.stop = PathStop::LambdaFloor;
        return slice;
      }
      solver_cfg.lambda = lambda;
      res = solver.solve(solver_cfg, cfg.pql);
      const ActiveSet active = res.fit.active();
      if (active == slice.entries.back().active) continue;
      slice.entries.push_back(make_entry(res, solver.state(), lambda, alpha));
      if (static_cast<Index>(active.size()) > size_cap) {
        slice.stop = PathStop::SizeCap;
        return slice;
      }
    }
    slice.stop = PathStop::LengthReached;
  } catch (const Error& e) {
    slice.stop = e.kind() == ErrorKind::DegenerateFit ? PathStop::DegenerateFit : PathStop::Failed;
    slice.error = e.what();
  }
  return slice;
}

PathResult fit_path(const Dataset& data, const PathConfig& cfg) {
  cfg.validate();
  cfg.solver.validate();
  PathResult out;
  out.config = cfg;
  out.family = data.family();
  out.scales = data.scales();
  for (const auto& c : data.clusters()) out.cluster_ids.push_back(c.id);
  out.slices.resize(cfg.alphas.size());

  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.threads), cfg.alphas.size());
  if (workers <= 1) {
    for (std::size_t s = 0; s < cfg.alphas.size(); ++s) out.slices[s] = fit_path_slice(data, cfg, cfg.alphas[s]);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t s = next++; s < cfg.alphas.size(); s = next++) {
        out.slices[s] = fit_path_slice(data, cfg, cfg.alphas[s]);
      }
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace glmmsel

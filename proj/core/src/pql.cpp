#include "glmmsel/pql.hpp"

#include <algorithm>
#include <cmath>

#include "glmmsel/errors.hpp"
#include "glmmsel/local_search.hpp"

namespace glmmsel {

Working working_quantities(Family family, double eta, double y) {
  switch (family) {
    case Family::Gaussian:
      return {y, 1.0};
    case Family::Bernoulli: {
      const double mu = std::clamp(1.0 / (1.0 + std::exp(-eta)), kMuClamp, 1.0 - kMuClamp);
      const double var = mu * (1.0 - mu);
      return {eta + (y - mu) / var, var};
    }
    case Family::Poisson:
      break;
  }
  raise(ErrorKind::Unsupported, "poisson responses are not supported");
}

void PqlConfig::validate() const {
  if (max_iter < 1) raise(ErrorKind::InvalidConfig, "PQL max_iter must be positive");
  if (!(tol > 0.0)) raise(ErrorKind::InvalidConfig, "PQL tol must be positive");
}

namespace {

std::unique_ptr<Dataset> working_dataset(const Dataset& data, const FitState* state,
                                         const Coefficients& coef) {
  const Index m = data.m();
  std::vector<Eigen::VectorXd> blups;
  if (state != nullptr) blups = blup(state->data(), state->fit(), state->cov());
  std::vector<Eigen::VectorXd> z(static_cast<std::size_t>(m));
  std::vector<Eigen::VectorXd> w(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) {
    const auto& c = data.cluster(i);
    const auto j = static_cast<std::size_t>(i);
    const Eigen::VectorXd eta =
        blups.empty() ? Eigen::VectorXd(c.X * coef.beta) : Eigen::VectorXd(c.X * (coef.beta + blups[j]));
    z[j].resize(c.size());
    w[j].resize(c.size());
    for (Index r = 0; r < c.size(); ++r) {
      const Working wq = working_quantities(data.family(), eta[r], c.y[r]);
      z[j][r] = wq.z;
      w[j][r] = wq.w;
    }
  }
  return std::make_unique<Dataset>(data.with_responses(z, w, Family::Gaussian));
}

double max_change(const Coefficients& a, const Coefficients& b) {
  return std::max((a.beta - b.beta).cwiseAbs().maxCoeff(), (a.gamma - b.gamma).cwiseAbs().maxCoeff());
}

}  // namespace

GlmmSolver::GlmmSolver(const Dataset& data, const Coefficients& init, bool local_search,
                       const LineSearchConfig& line_search)
    : data_(&data), local_search_(local_search), line_search_(line_search) {
  if (data.family() == Family::Poisson) raise(ErrorKind::Unsupported, "poisson responses are not supported");
  if (data.family() == Family::Bernoulli) working_ = working_dataset(data, nullptr, init);
  state_ = std::make_unique<FitState>(working(), init, line_search_);
}

void GlmmSolver::relinearize() {
  const Coefficients coef = state_->coefficients();
  auto next = working_dataset(*data_, state_.get(), coef);
  auto state = std::make_unique<FitState>(*next, coef, line_search_);
  state->steps() = state_->steps();
  state_ = std::move(state);
  working_ = std::move(next);
}

GlmmResult GlmmSolver::solve(const SolverConfig& cfg, const PqlConfig& pql) {
  cfg.validate();
  pql.validate();
  GlmmResult out;
  auto inner = [&] { return local_search_ ? run_cd_ls(*state_, cfg) : run_cd(*state_, cfg); };

  if (!working_) {
    CdReport report = inner();
    out.inner_objectives.push_back(state_->objective(cfg.lambda, cfg.alpha));
    out.outer_iterations = 1;
    out.converged = true;
    out.fit = summarize(*state_, cfg, std::move(report));
    return out;
  }

  CdReport last;
  for (int it = 1; it <= pql.max_iter; ++it) {
    const Coefficients before = state_->coefficients();
    last = inner();
    out.inner_objectives.push_back(state_->objective(cfg.lambda, cfg.alpha));
    out.inner_traces.push_back(last.trace);
    out.outer_iterations = it;
    if (max_change(before, state_->coefficients()) < pql.tol) {
      out.converged = true;
      break;
    }
    if (it < pql.max_iter) relinearize();
  }
  out.fit = summarize(*state_, cfg, std::move(last));
  return out;
}

GlmmResult fit_glmm(const Dataset& data, const Coefficients& init, const SolverConfig& cfg,
                    const PqlConfig& pql, bool local_search) {
  GlmmSolver solver(data, init, local_search, cfg.line_search);
  return solver.solve(cfg, pql);
}

GlmmResult fit_glmm(const Dataset& data, const SolverConfig& cfg, const PqlConfig& pql,
                    bool local_search) {
  return fit_glmm(data, Coefficients::zeros(data.p()), cfg, pql, local_search);
}

}  // namespace glmmsel

#include "glmmsel/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "glmmsel/errors.hpp"

namespace glmmsel {

void SolverConfig::validate() const {
  if (!(lambda >= 0.0)) raise(ErrorKind::InvalidConfig, "lambda must be nonnegative");
  if (!(alpha > 0.0 && alpha <= 1.0)) raise(ErrorKind::InvalidConfig, "alpha must lie in (0, 1]");
  if (!(tol >= 0.0)) raise(ErrorKind::InvalidConfig, "tol must be nonnegative");
  if (max_cycles < 1) raise(ErrorKind::InvalidConfig, "max_cycles must be positive");
  if (!(line_search.initial > 0.0) || !(line_search.growth > 1.0) || line_search.max_doublings < 0) {
    raise(ErrorKind::InvalidConfig, "invalid line-search settings");
  }
  if (!(box.beta > 0.0) || !(box.gamma > 0.0)) raise(ErrorKind::InvalidConfig, "box bounds must be positive");
}

std::size_t ActiveSet::random_count() const noexcept {
  return static_cast<std::size_t>(std::count(random.begin(), random.end(), true));
}

bool ActiveSet::contains(Index k) const noexcept {
  return std::binary_search(predictors.begin(), predictors.end(), k);
}

ActiveSet active_set(const Eigen::VectorXd& beta, const Eigen::VectorXd& gamma) {
  ActiveSet out;
  for (Index k = 0; k < beta.size(); ++k) {
    if (beta[k] != 0.0) {
      out.predictors.push_back(k);
      out.random.push_back(gamma[k] != 0.0);
    }
  }
  return out;
}

double penalized_objective(double nll, const Eigen::VectorXd& beta, const Eigen::VectorXd& gamma,
                           double lambda, double alpha) {
  if (lambda == 0.0) return nll;
  double nnz_beta = 0.0;
  double nnz_gamma = 0.0;
  for (Index k = 0; k < beta.size(); ++k) {
    nnz_beta += beta[k] != 0.0 ? 1.0 : 0.0;
    nnz_gamma += gamma[k] != 0.0 ? 1.0 : 0.0;
  }
  return nll + lambda * alpha * nnz_beta + lambda * (1.0 - alpha) * nnz_gamma;
}

StepSizes::StepSizes(Index p, double initial)
    : lbar_(static_cast<std::size_t>(p), initial), accepted_(static_cast<std::size_t>(p), 0),
      initial_(initial), fallback_(initial) {}

double StepSizes::first_trial(Index k) const {
  const auto j = static_cast<std::size_t>(k);
  return accepted_[j] ? 0.5 * lbar_[j] : fallback_;
}

void StepSizes::accept(Index k, double lbar) {
  const auto j = static_cast<std::size_t>(k);
  lbar_[j] = lbar;
  accepted_[j] = 1;
}

void StepSizes::refresh_default() {
  std::vector<double> values;
  for (std::size_t j = 0; j < lbar_.size(); ++j) {
    if (accepted_[j]) values.push_back(lbar_[j]);
  }
  if (values.empty()) {
    fallback_ = initial_;
    return;
  }
  auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  std::nth_element(values.begin(), mid, values.end());
  fallback_ = *mid;
}

FitState::FitState(const Dataset& data, const Coefficients& init, const LineSearchConfig& line_search)
    : data_(&data), steps_(data.p(), line_search.initial) {
  cov_ = build_state(data, init.gamma);
  fit_ = make_fit(data, cov_, init.beta, init.gamma);
  projected_.resize(static_cast<std::size_t>(data.m()));
  active_count_ = static_cast<Index>((fit_.beta.array() != 0.0).count());
}

double FitState::objective(double lambda, double alpha) const {
  return penalized_objective(fit_.objective_nll, fit_.beta, fit_.gamma, lambda, alpha);
}

const BlockLikelihood& FitState::project(Index k) {
  if (projected_k_ == k) return block_;
  const Index m = data_->m();
  block_.reset(fit_.quad, cov_.total_logdet(), fit_.n_total, m);
  auto& q = block_.q();
  auto& a = block_.a();
  for (Index i = 0; i < m; ++i) {
    const auto j = static_cast<std::size_t>(i);
    const auto x = data_->cluster(i).X.col(k);
    projected_[j].noalias() = cov_.cluster(i).inv * x;
    q[j] = x.dot(projected_[j]);
    a[j] = x.dot(fit_.weighted_residuals[j]);
  }
  projected_k_ = k;
  return block_;
}

void FitState::set_block(Index k, BlockValue value) {
  const double d_beta = value.beta - fit_.beta[k];
  const double d_gamma = value.gamma - fit_.gamma[k];
  if (d_beta == 0.0 && d_gamma == 0.0) return;
  project(k);
  const bool was_active = fit_.beta[k] != 0.0;

  if (d_gamma != 0.0) {
    try {
      rank_one_update(cov_, *data_, k, d_gamma, projected_);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SingularUpdate) throw;
      fit_.beta[k] = value.beta;
      Eigen::VectorXd gamma = fit_.gamma;
      gamma[k] = value.gamma;
      cov_ = build_state(*data_, gamma);
      fit_.gamma = gamma;
      refresh_fit(fit_, *data_, cov_);
      active_count_ += (value.beta != 0.0 ? 1 : 0) - (was_active ? 1 : 0);
      projected_k_ = -1;
      return;
    }
  }

  const auto& q = block_.q();
  const auto& a = block_.a();
  fit_.quad = 0.0;
  for (Index i = 0; i < data_->m(); ++i) {
    const auto j = static_cast<std::size_t>(i);
    double coef = d_beta;
    if (d_gamma != 0.0) coef += d_gamma * (a[j] - d_beta * q[j]) / (1.0 + d_gamma * q[j]);
    fit_.weighted_residuals[j] -= coef * projected_[j];
    if (d_beta != 0.0) fit_.residuals[j] -= d_beta * data_->cluster(i).X.col(k);
    fit_.quad += fit_.residuals[j].dot(fit_.weighted_residuals[j]);
  }
  fit_.beta[k] = value.beta;
  fit_.gamma[k] = cov_.gamma()[k];
  fit_.sigma2_hat = fit_.quad / static_cast<double>(fit_.n_total);
  fit_.objective_nll = fit_.quad > 1e-300 ? cov_.total_logdet() +
                                                static_cast<double>(fit_.n_total) * std::log(fit_.quad)
                                          : -std::numeric_limits<double>::infinity();
  active_count_ += (value.beta != 0.0 ? 1 : 0) - (was_active ? 1 : 0);
  projected_k_ = -1;
}

void FitState::resync() {
  refresh_fit(fit_, *data_, cov_);
  projected_k_ = -1;
}

void FitState::rebuild() {
  cov_ = build_state(*data_, fit_.gamma);
  refresh_fit(fit_, *data_, cov_);
  projected_k_ = -1;
}

BlockStep block_update(FitState& state, Index k, const SolverConfig& cfg) {
  const BlockLikelihood& block = state.project(k);
  const BlockGradient g = block.gradient();
  const double beta = state.fit().beta[k];
  const double gamma = state.fit().gamma[k];
  double lbar = state.steps().first_trial(k);

  for (int d = 0; d <= cfg.line_search.max_doublings; ++d, lbar *= cfg.line_search.growth) {
    const BlockValue cand = threshold(beta - g.beta / lbar, gamma - g.gamma / lbar, cfg.lambda,
                                      cfg.alpha, lbar, cfg.box);
    const double d_beta = cand.beta - beta;
    const double d_gamma = cand.gamma - gamma;
    if (d_beta == 0.0 && d_gamma == 0.0) return {false, lbar, d};
    const double change = block.delta(d_beta, d_gamma);
    const double linear = g.beta * d_beta + g.gamma * d_gamma;
    const double curvature = 0.5 * lbar * (d_beta * d_beta + d_gamma * d_gamma);
    const double slack = 1e-10 * (std::abs(linear) + curvature);
    if (change <= linear + curvature + slack) {
      state.set_block(k, cand);
      state.steps().accept(k, lbar);
      return {true, lbar, d};
    }
  }
  raise(ErrorKind::LineSearchExhausted,
        "block " + std::to_string(k) + " failed the descent bound after " +
            std::to_string(cfg.line_search.max_doublings) + " doublings (last step constant " +
            std::to_string(lbar / cfg.line_search.growth) + ")");
}

namespace {

class CoordinateDescent {
 public:
  CoordinateDescent(FitState& state, const SolverConfig& cfg) : state_(state), cfg_(cfg) {}

  CdReport run() {
    const Index p = state_.data().p();
    state_.steps().refresh_default();
    report_.trace.push_back(objective());

    // Screening and sorting by the activation score of every block.
    std::vector<double> score(static_cast<std::size_t>(p));
    for (Index k = 0; k < p; ++k) {
      const BlockGradient g = state_.project(k).gradient();
      const double down = std::max(-g.gamma, 0.0);
      score[static_cast<std::size_t>(k)] = g.beta * g.beta + down * down;
    }
    std::vector<Index> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
      return score[static_cast<std::size_t>(a)] > score[static_cast<std::size_t>(b)];
    });

    std::vector<Index> strong;
    std::vector<Index> weak;
    std::size_t inactive_taken = 0;
    for (Index k : order) {
      if (state_.is_active(k)) {
        strong.push_back(k);
      } else if (inactive_taken < cfg_.strong_set_size) {
        strong.push_back(k);
        ++inactive_taken;
      } else {
        weak.push_back(k);
      }
    }

    while (true) {
      const bool settled = converge_on(strong);
      if (!settled || report_.cycles >= cfg_.max_cycles) break;
      if (weak.empty()) {
        report_.converged = true;
        break;
      }
      std::vector<char> before = active_mask();
      cycle(weak, false);
      std::vector<Index> still_weak;
      bool promoted = false;
      for (Index k : weak) {
        if (state_.is_active(k)) {
          strong.push_back(k);
          promoted = true;
        } else {
          still_weak.push_back(k);
        }
      }
      weak.swap(still_weak);
      if (!promoted && before == active_mask()) {
        report_.converged = true;
        break;
      }
    }
    return std::move(report_);
  }

 private:
  double objective() const { return state_.objective(cfg_.lambda, cfg_.alpha); }

  std::vector<char> active_mask() const {
    const auto& beta = state_.fit().beta;
    std::vector<char> mask(static_cast<std::size_t>(beta.size()));
    for (Index k = 0; k < beta.size(); ++k) mask[static_cast<std::size_t>(k)] = beta[k] != 0.0;
    return mask;
  }

  std::vector<char> support_mask() const {
    const auto& fit = state_.fit();
    std::vector<char> mask(static_cast<std::size_t>(fit.beta.size()));
    for (Index k = 0; k < fit.beta.size(); ++k) {
      mask[static_cast<std::size_t>(k)] =
          static_cast<char>((fit.beta[k] != 0.0 ? 1 : 0) | (fit.gamma[k] != 0.0 ? 2 : 0));
    }
    return mask;
  }

  void cycle(const std::vector<Index>& blocks, bool active_only) {
    if (report_.cycles % 10 == 0) state_.resync();
    for (Index k : blocks) {
      if (active_only && !state_.is_active(k)) continue;
      block_update(state_, k, cfg_);
    }
    ++report_.cycles;
    state_.steps().refresh_default();
    report_.trace.push_back(objective());
    if (cfg_.record_supports) report_.supports.push_back(state_.active());
  }

  bool small_change(double before, double after) const {
    return std::abs(before - after) <= cfg_.tol * std::max(1.0, std::abs(after));
  }

  // Cycles over `blocks` until the objective settles with an unchanged
  // support. After `active_stabilize_cycles` unchanged cycles only active
  // blocks are visited, followed by one full confirming pass.
  bool converge_on(const std::vector<Index>& blocks) {
    int stable = 0;
    bool restricted = false;
    while (report_.cycles < cfg_.max_cycles) {
      const std::vector<char> before = support_mask();
      const double f_before = objective();
      cycle(blocks, restricted);
      const bool changed = before != support_mask();
      const bool small = small_change(f_before, objective());
      if (restricted) {
        if (small || changed) restricted = false;
        continue;
      }
      if (small && !changed) return true;
      stable = changed ? 0 : stable + 1;
      if (stable >= cfg_.active_stabilize_cycles) restricted = true;
    }
    return false;
  }

  FitState& state_;
  const SolverConfig& cfg_;
  CdReport report_;
};

}  // namespace

CdReport run_cd(FitState& state, const SolverConfig& cfg) {
  cfg.validate();
  return CoordinateDescent(state, cfg).run();
}

FitResult summarize(const FitState& state, const SolverConfig& cfg, CdReport report) {
  FitResult out;
  out.fit = state.fit();
  out.blups = blup(state.data(), state.fit(), state.cov());
  out.trace = std::move(report.trace);
  out.objective = state.objective(cfg.lambda, cfg.alpha);
  out.cycles = report.cycles;
  out.converged = report.converged;
  return out;
}

FitResult fit_cd(const Dataset& data, const Coefficients& init, const SolverConfig& cfg) {
  cfg.validate();
  FitState state(data, init, cfg.line_search);
  CdReport report = run_cd(state, cfg);
  return summarize(state, cfg, std::move(report));
}

FitResult fit_cd(const Dataset& data, const SolverConfig& cfg) {
  return fit_cd(data, Coefficients::zeros(data.p()), cfg);
}

}  // namespace glmmsel

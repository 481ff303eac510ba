#include "glmmsel/local_search.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "glmmsel/errors.hpp"

namespace glmmsel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Likelihood change of an inactive block at (beta*(gamma), gamma), beta
// profiled out in closed form:
//   l(g) = sum log(1 + g q_i) + n log(S - g sum a_i^2/d_i - A(g)^2 / Q(g))
// with d_i = 1 + g q_i, A(g) = sum a_i/d_i, Q(g) = sum q_i/d_i, and
//   l'(g) = sum q_i/d_i - n sum (a_i - beta* q_i)^2 / d_i^2 / S*(g).
class ProfiledBlock {
 public:
  explicit ProfiledBlock(const BlockLikelihood& block)
      : q_(block.q()), a_(block.a()), quad_(block.quad()), n_(block.n_total()) {}

  struct Point {
    double change = kInf;
    double beta = 0.0;
  };

  Point at(double gamma) const {
    double logdet = 0.0;
    double shrink = 0.0;
    double sum_a = 0.0;
    double sum_q = 0.0;
    for (std::size_t i = 0; i < q_.size(); ++i) {
      const double d = 1.0 + gamma * q_[i];
      logdet += std::log1p(gamma * q_[i]);
      shrink += gamma * a_[i] * a_[i] / d;
      sum_a += a_[i] / d;
      sum_q += q_[i] / d;
    }
    if (!(sum_q > 0.0)) return {};
    const double beta = sum_a / sum_q;
    const double quad = quad_ - shrink - sum_a * beta;
    if (!(quad > 1e-300) || beta == 0.0) return {};
    return {logdet + n_ * std::log(quad / quad_), beta};
  }

  // Sign of l'(gamma); positive outside the domain.
  double slope(double gamma) const {
    double shrink = 0.0;
    double sum_a = 0.0;
    double sum_q = 0.0;
    for (std::size_t i = 0; i < q_.size(); ++i) {
      const double d = 1.0 + gamma * q_[i];
      shrink += gamma * a_[i] * a_[i] / d;
      sum_a += a_[i] / d;
      sum_q += q_[i] / d;
    }
    const double beta = sum_a / sum_q;
    const double quad = quad_ - shrink - sum_a * beta;
    if (!(quad > 1e-300)) return 1.0;
    double fit = 0.0;
    for (std::size_t i = 0; i < q_.size(); ++i) {
      const double d = 1.0 + gamma * q_[i];
      const double e = (a_[i] - beta * q_[i]) / d;
      fit += e * e;
    }
    return sum_q - n_ * fit / quad;
  }

  // Lower bound of l over every (beta, gamma): each cluster can at most
  // explain a_i^2 / q_i of S, and the log-determinant term is nonnegative.
  double lower_bound() const {
    double explained = 0.0;
    for (std::size_t i = 0; i < q_.size(); ++i) {
      if (q_[i] > 0.0) explained += a_[i] * a_[i] / q_[i];
    }
    const double rest = quad_ - explained;
    return rest > 1e-300 ? n_ * std::log(rest / quad_) : -kInf;
  }

  double mean_q() const {
    double s = 0.0;
    for (double v : q_) s += v;
    return q_.empty() ? 0.0 : s / static_cast<double>(q_.size());
  }

 private:
  const std::vector<double>& q_;
  const std::vector<double>& a_;
  double quad_;
  double n_;
};

}  // namespace

Insertion best_insertion(const BlockLikelihood& block, double lambda, double alpha, double cutoff) {
  Insertion best;  // stay inactive
  if (!(block.quad() > 1e-300)) return best;

  double sum_a = 0.0;
  double sum_q = 0.0;
  for (std::size_t i = 0; i < block.q().size(); ++i) {
    sum_a += block.a()[i];
    sum_q += block.q()[i];
  }
  if (!(sum_q > 0.0)) return best;

  const double fixed_beta = sum_a / sum_q;
  if (fixed_beta != 0.0) {
    const double change = block.delta(fixed_beta, 0.0) + lambda * alpha;
    if (change < best.change) best = {{fixed_beta, 0.0}, change};
  }

  const ProfiledBlock prof(block);
  const double scale = prof.mean_q();
  if (!(scale > 0.0)) return best;
  if (prof.lower_bound() + lambda >= std::min(best.change, cutoff)) return best;

  // Sign scan of the derivative over t = log10(gamma * mean q); every local
  // minimum on the grid is refined by bisection, then the best is kept.
  constexpr int kGrid = 15;
  constexpr double kLogLo = -3.0;
  constexpr double kLogStep = 0.5;
  auto gamma_of = [&](double t) { return std::pow(10.0, t) / scale; };
  std::array<double, kGrid> slope;
  for (int g = 0; g < kGrid; ++g) slope[static_cast<std::size_t>(g)] = prof.slope(gamma_of(kLogLo + kLogStep * g));
  double t_best = 0.0;
  double best_val = kInf;
  auto keep = [&](double t) {
    const double val = prof.at(gamma_of(t)).change;
    if (val < best_val) {
      best_val = val;
      t_best = t;
    }
  };
  if (slope.front() >= 0.0) keep(kLogLo);
  if (slope.back() < 0.0) keep(kLogLo + kLogStep * (kGrid - 1));
  for (int g = 0; g + 1 < kGrid; ++g) {
    if (!(slope[static_cast<std::size_t>(g)] < 0.0 && slope[static_cast<std::size_t>(g + 1)] >= 0.0)) continue;
    double lo = kLogLo + kLogStep * g;
    double hi = lo + kLogStep;
    for (int it = 0; it < 40 && hi - lo > 1e-10; ++it) {
      const double mid = 0.5 * (lo + hi);
      (prof.slope(gamma_of(mid)) < 0.0 ? lo : hi) = mid;
    }
    keep(0.5 * (lo + hi));
  }
  if (best_val == kInf) return best;

  const double gamma = gamma_of(t_best);
  const auto point = prof.at(gamma);
  if (point.change == kInf) return best;
  // Re-evaluate through the block itself so the reported change matches what
  // applying the move produces.
  const double change = block.delta(point.beta, gamma) + lambda;
  if (change < best.change) best = {{point.beta, gamma}, change};
  return best;
}

SwapResult best_swap(FitState& state, const SolverConfig& cfg) {
  const Dataset& data = state.data();
  const Index p = data.p();
  const Index m = data.m();
  const auto mu = static_cast<std::size_t>(m);
  SwapResult out;
  out.before = state.objective(cfg.lambda, cfg.alpha);
  out.after = out.before;

  std::vector<Index> active;
  std::vector<Index> inactive;
  for (Index k = 0; k < p; ++k) (state.is_active(k) ? active : inactive).push_back(k);
  out.candidates = active.size() * inactive.size();

  const double base_pen = out.before - state.nll();
  double best_f = out.before - 1e-9 * std::max(1.0, std::abs(out.before));
  bool found = false;
  auto consider = [&](double f, Index removed, Index inserted, const BlockValue& value) {
    if (!(f < best_f)) return;
    best_f = f;
    found = true;
    out.removed = removed;
    out.inserted = value.beta != 0.0 ? inserted : -1;
    out.value = value;
  };
  // Objective terms left after zeroing active block j.
  auto penalty_without = [&](Index j) {
    return base_pen - cfg.lambda * cfg.alpha - (state.fit().gamma[j] != 0.0 ? cfg.lambda * (1.0 - cfg.alpha) : 0.0);
  };

  // Single-block moves first: each block re-optimized from zero with the rest
  // fixed. Swaps are searched only when none of these improves.
  for (Index k : inactive) {
    const Insertion ins = best_insertion(state.project(k), cfg.lambda, cfg.alpha, best_f - out.before);
    consider(out.before + ins.change, -1, k, ins.value);
  }
  for (Index j : active) {
    BlockLikelihood removed = state.project(j);
    removed.shift(-state.fit().beta[j], -state.fit().gamma[j]);
    if (!(removed.quad() > 1e-300)) continue;
    const double base = removed.value() + penalty_without(j);
    const Insertion ins = best_insertion(removed, cfg.lambda, cfg.alpha, best_f - base);
    consider(base + ins.change, j, j, ins.value);
  }

  if (!found) {
    std::vector<double> q_inactive(inactive.size() * mu);
    for (std::size_t c = 0; c < inactive.size(); ++c) {
      const auto& q = state.project(inactive[c]).q();
      std::copy(q.begin(), q.end(), q_inactive.begin() + static_cast<std::ptrdiff_t>(c * mu));
    }
    std::vector<Eigen::VectorXd> v0(mu);
    std::vector<double> downdate(mu);
    BlockLikelihood cand;

    for (Index j : active) {
      BlockLikelihood removed = state.project(j);
      const auto u = state.projection();
      const double d_beta = -state.fit().beta[j];
      const double d_gamma = -state.fit().gamma[j];
      for (std::size_t i = 0; i < mu; ++i) {
        const double q = removed.q()[i];
        const double a = removed.a()[i];
        const double denom = 1.0 + d_gamma * q;
        downdate[i] = d_gamma / denom;
        const double coef = d_beta + d_gamma * (a - d_beta * q) / denom;
        v0[i] = state.fit().weighted_residuals[i] - coef * u[i];
      }
      removed.shift(d_beta, d_gamma);
      if (!(removed.quad() > 1e-300)) continue;
      const double base = removed.value() + penalty_without(j);

      for (std::size_t c = 0; c < inactive.size(); ++c) {
        const Index k = inactive[c];
        cand.reset(removed.quad(), removed.logdet(), data.n_total(), m);
        for (std::size_t i = 0; i < mu; ++i) {
          const auto x = data.cluster(static_cast<Index>(i)).X.col(k);
          const double cross = x.dot(u[i]);
          cand.q()[i] = q_inactive[c * mu + i] - downdate[i] * cross * cross;
          cand.a()[i] = x.dot(v0[i]);
        }
        const Insertion ins = best_insertion(cand, cfg.lambda, cfg.alpha, best_f - base);
        consider(base + ins.change, j, k, ins.value);
      }
    }
  }
  if (!found) return out;

  BlockValue old;
  if (out.removed >= 0) {
    old = {state.fit().beta[out.removed], state.fit().gamma[out.removed]};
    state.set_block(out.removed, {});
  }
  if (out.inserted >= 0) state.set_block(out.inserted, out.value);
  const double after = state.objective(cfg.lambda, cfg.alpha);
  if (!(after < out.before)) {
    if (out.inserted >= 0) state.set_block(out.inserted, {});
    if (out.removed >= 0) state.set_block(out.removed, old);
    state.resync();
    return out;
  }
  out.improved = true;
  out.after = after;
  return out;
}

CdReport run_cd_ls(FitState& state, const SolverConfig& cfg, int max_rounds) {
  CdReport total = run_cd(state, cfg);
  for (int round = 0; round < max_rounds; ++round) {
    const SwapResult swap = best_swap(state, cfg);
    if (!swap.improved) break;
    total.trace.push_back(swap.after);
    CdReport next = run_cd(state, cfg);
    total.trace.insert(total.trace.end(), next.trace.begin() + 1, next.trace.end());
    total.cycles += next.cycles;
    total.supports.insert(total.supports.end(), next.supports.begin(), next.supports.end());
    total.converged = next.converged;
  }
  return total;
}

FitResult fit_cd_ls(const Dataset& data, const Coefficients& init, const SolverConfig& cfg) {
  cfg.validate();
  FitState state(data, init, cfg.line_search);
  CdReport report = run_cd_ls(state, cfg);
  return summarize(state, cfg, std::move(report));
}

FitResult fit_cd_ls(const Dataset& data, const SolverConfig& cfg) {
  return fit_cd_ls(data, Coefficients::zeros(data.p()), cfg);
}

}  // namespace glmmsel

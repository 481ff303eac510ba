#include "glmmsel/likelihood.hpp"

#include <cmath>
#include <limits>

#include "glmmsel/errors.hpp"

namespace glmmsel {

namespace {

constexpr double kMinQuad = 1e-300;

void require_quad(double quad) {
  if (!(quad > kMinQuad)) {
    raise(ErrorKind::DegenerateFit, "response lies in the column space of the active predictors");
  }
}

}  // namespace

ModelFit make_fit(const Dataset& data, const CovarianceState& state, Eigen::VectorXd beta,
                  Eigen::VectorXd gamma) {
  if (beta.size() != data.p() || gamma.size() != data.p()) {
    raise(ErrorKind::InvalidConfig, "coefficient length does not match p");
  }
  for (Index k = 0; k < data.p(); ++k) {
    if (gamma[k] < 0.0) raise(ErrorKind::InvalidConfig, "gamma must be nonnegative");
    if (beta[k] == 0.0 && gamma[k] != 0.0) {
      raise(ErrorKind::InvalidConfig, "hierarchy violated: gamma_" + std::to_string(k) +
                                          " nonzero with beta_" + std::to_string(k) + " zero");
    }
  }
  ModelFit fit;
  fit.beta = std::move(beta);
  fit.gamma = std::move(gamma);
  fit.n_total = data.n_total();
  refresh_fit(fit, data, state);
  return fit;
}

void refresh_fit(ModelFit& fit, const Dataset& data, const CovarianceState& state) {
  fit.residuals.resize(static_cast<std::size_t>(data.m()));
  for (Index i = 0; i < data.m(); ++i) {
    const auto& c = data.cluster(i);
    fit.residuals[static_cast<std::size_t>(i)] = c.y - c.X * fit.beta;
  }
  fit.n_total = data.n_total();
  refresh_weighted(fit, state);
}

void refresh_weighted(ModelFit& fit, const CovarianceState& state) {
  fit.weighted_residuals.resize(fit.residuals.size());
  fit.quad = 0.0;
  for (std::size_t i = 0; i < fit.residuals.size(); ++i) {
    fit.weighted_residuals[i].noalias() = state.clusters()[i].inv * fit.residuals[i];
    fit.quad += fit.residuals[i].dot(fit.weighted_residuals[i]);
  }
  fit.sigma2_hat = fit.quad / static_cast<double>(fit.n_total);
  fit.objective_nll = fit.quad > kMinQuad
                          ? state.total_logdet() + static_cast<double>(fit.n_total) * std::log(fit.quad)
                          : -std::numeric_limits<double>::infinity();
}

double neg_log_likelihood(const ModelFit& fit, const CovarianceState& state) {
  require_quad(fit.quad);
  return state.total_logdet() + static_cast<double>(fit.n_total) * std::log(fit.quad);
}

double profiled_sigma2(const ModelFit& fit, const CovarianceState&) {
  require_quad(fit.quad);
  return fit.quad / static_cast<double>(fit.n_total);
}

BlockGradient grad_block(const Dataset& data, const ModelFit& fit, const CovarianceState& state,
                         Index k) {
  require_quad(fit.quad);
  double sum_a = 0.0;
  double sum_a2 = 0.0;
  double sum_q = 0.0;
  for (Index i = 0; i < data.m(); ++i) {
    const auto x = data.cluster(i).X.col(k);
    const double a = x.dot(fit.weighted_residuals[static_cast<std::size_t>(i)]);
    sum_a += a;
    sum_a2 += a * a;
    sum_q += x.dot(state.cluster(i).inv * x);
  }
  const double n = static_cast<double>(fit.n_total);
  return {-2.0 * n * sum_a / fit.quad, sum_q - n * sum_a2 / fit.quad};
}

std::vector<Eigen::VectorXd> blup(const Dataset& data, const ModelFit& fit,
                                  const CovarianceState&) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(data.m()));
  for (Index i = 0; i < data.m(); ++i) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(data.p());
    const auto& c = data.cluster(i);
    const auto& v = fit.weighted_residuals[static_cast<std::size_t>(i)];
    for (Index k = 0; k < data.p(); ++k) {
      if (fit.gamma[k] != 0.0) u[k] = fit.gamma[k] * c.X.col(k).dot(v);
    }
    out.push_back(std::move(u));
  }
  return out;
}

BlockLikelihood::BlockLikelihood(double quad, double logdet, Index n_total, std::vector<double> q,
                                 std::vector<double> a)
    : quad_(quad), logdet_(logdet), n_(static_cast<double>(n_total)), q_(std::move(q)),
      a_(std::move(a)) {}

void BlockLikelihood::reset(double quad, double logdet, Index n_total, Index clusters) {
  quad_ = quad;
  logdet_ = logdet;
  n_ = static_cast<double>(n_total);
  q_.resize(static_cast<std::size_t>(clusters));
  a_.resize(static_cast<std::size_t>(clusters));
}

double BlockLikelihood::value() const {
  require_quad(quad_);
  return logdet_ + n_ * std::log(quad_);
}

BlockGradient BlockLikelihood::gradient() const {
  require_quad(quad_);
  double sum_a = 0.0;
  double sum_a2 = 0.0;
  double sum_q = 0.0;
  for (std::size_t i = 0; i < q_.size(); ++i) {
    sum_a += a_[i];
    sum_a2 += a_[i] * a_[i];
    sum_q += q_[i];
  }
  return {-2.0 * n_ * sum_a / quad_, sum_q - n_ * sum_a2 / quad_};
}

double BlockLikelihood::delta(double d_beta, double d_gamma) const {
  double d_quad = 0.0;
  double d_logdet = 0.0;
  for (std::size_t i = 0; i < q_.size(); ++i) {
    const double q = q_[i];
    const double a = a_[i];
    const double resid = a - d_beta * q;
    d_quad += d_beta * (d_beta * q - 2.0 * a);
    if (d_gamma != 0.0) {
      const double denom = 1.0 + d_gamma * q;
      if (!(denom > 0.0)) return std::numeric_limits<double>::infinity();
      d_quad -= d_gamma * resid * resid / denom;
      d_logdet += std::log1p(d_gamma * q);
    }
  }
  const double ratio = d_quad / quad_;
  if (!(ratio > -1.0) || !((quad_ + d_quad) > kMinQuad)) {
    return std::numeric_limits<double>::infinity();
  }
  return d_logdet + n_ * std::log1p(ratio);
}

void BlockLikelihood::shift(double d_beta, double d_gamma) {
  double d_quad = 0.0;
  for (std::size_t i = 0; i < q_.size(); ++i) {
    const double q = q_[i];
    const double a = a_[i];
    const double resid = a - d_beta * q;
    const double denom = 1.0 + d_gamma * q;
    d_quad += d_beta * (d_beta * q - 2.0 * a) - d_gamma * resid * resid / denom;
    logdet_ += std::log1p(d_gamma * q);
    // V'^{-1} x = V^{-1} x / (1 + d_g q), hence both scalars shrink by the same factor.
    q_[i] = q / denom;
    a_[i] = resid / denom;
  }
  quad_ += d_quad;
}

}  // namespace glmmsel

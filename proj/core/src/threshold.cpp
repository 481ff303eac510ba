#include "glmmsel/threshold.hpp"

#include <algorithm>

namespace glmmsel {

BlockValue threshold(double beta_hat, double gamma_hat, double lambda, double alpha, double lbar) {
  const double gamma_pos = std::max(gamma_hat, 0.0);
  const double b2 = beta_hat * beta_hat;
  const double g2 = gamma_pos * gamma_pos;
  if (beta_hat == 0.0) return {};  // no nonzero beta to carry a random effect
  if (b2 <= 2.0 * lambda * alpha / lbar && b2 + g2 <= 2.0 * lambda / lbar) return {};
  if (g2 <= 2.0 * lambda * (1.0 - alpha) / lbar) return {beta_hat, 0.0};
  return {beta_hat, gamma_pos};
}

BlockValue threshold(double beta_hat, double gamma_hat, double lambda, double alpha, double lbar,
                     const BoxBounds& box) {
  if (!box.active()) return threshold(beta_hat, gamma_hat, lambda, alpha, lbar);
  const double gamma_pos = std::max(gamma_hat, 0.0);
  const double beta_c = std::clamp(beta_hat, -box.beta, box.beta);
  const double gamma_c = std::min(gamma_pos, box.gamma);
  const double half = 0.5 * lbar;
  const double f_null = half * (beta_hat * beta_hat + gamma_pos * gamma_pos);
  const double f_fixed = half * ((beta_hat - beta_c) * (beta_hat - beta_c) + gamma_pos * gamma_pos) +
                         lambda * alpha;
  const double f_both = half * ((beta_hat - beta_c) * (beta_hat - beta_c) +
                                (gamma_pos - gamma_c) * (gamma_pos - gamma_c)) +
                        lambda;
  if (beta_c == 0.0 || (f_null <= f_fixed && f_null <= f_both)) return {};
  if (f_fixed <= f_both || gamma_c == 0.0) return {beta_c, 0.0};
  return {beta_c, gamma_c};
}

}  // namespace glmmsel

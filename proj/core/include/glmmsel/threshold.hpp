#pragma once

#include <limits>

namespace glmmsel {

struct BlockValue {
  double beta = 0.0;
  double gamma = 0.0;

  friend bool operator==(const BlockValue&, const BlockValue&) = default;
};

/// Optional box constraints |beta_k| <= beta, 0 <= gamma_k <= gamma.
struct BoxBounds {
  double beta = std::numeric_limits<double>::infinity();
  double gamma = std::numeric_limits<double>::infinity();

  bool active() const noexcept {
    return beta != std::numeric_limits<double>::infinity() ||
           gamma != std::numeric_limits<double>::infinity();
  }
};

/// Minimizer over (beta, gamma >= 0, beta == 0 => gamma == 0) of
///   lbar/2 (beta - beta_hat)^2 + lbar/2 (gamma - gamma_hat)^2
///     + lambda alpha 1{beta != 0} + lambda (1 - alpha) 1{gamma != 0}.
/// Boundary ties resolve to the sparser candidate.
BlockValue threshold(double beta_hat, double gamma_hat, double lambda, double alpha, double lbar);

/// The same problem restricted to the box.
BlockValue threshold(double beta_hat, double gamma_hat, double lambda, double alpha, double lbar,
                     const BoxBounds& box);

}  // namespace glmmsel

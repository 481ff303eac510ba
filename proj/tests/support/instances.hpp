#pragma once

// Small random datasets for property tests.

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "glmmsel/dataset.hpp"

namespace support {

using glmmsel::ClusterData;
using glmmsel::Dataset;
using glmmsel::Family;
using glmmsel::Index;

struct InstanceShape {
  Index m = 3;
  Index min_ni = 2;
  Index max_ni = 6;
  Index p = 4;
  double signal = 1.0;        // scale of the true fixed effects
  double random_sd = 0.7;     // sd of the random effects on the first predictor
  bool random_weights = false;
  bool standardized = true;
};

inline Dataset random_dataset(std::mt19937_64& rng, const InstanceShape& shape) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<Index> size(shape.min_ni, shape.max_ni);
  std::uniform_real_distribution<double> weight(0.5, 2.0);
  Eigen::VectorXd beta(shape.p);
  for (Index k = 0; k < shape.p; ++k) beta[k] = k < 2 ? shape.signal * (1.0 + 0.5 * normal(rng)) : 0.0;
  std::vector<ClusterData> clusters;
  for (Index i = 0; i < shape.m; ++i) {
    ClusterData c;
    c.id = "c" + std::to_string(i);
    const Index n = size(rng);
    c.X.resize(n, shape.p);
    for (Index r = 0; r < n; ++r) {
      for (Index k = 0; k < shape.p; ++k) c.X(r, k) = normal(rng);
    }
    Eigen::VectorXd u = Eigen::VectorXd::Zero(shape.p);
    u[0] = shape.random_sd * normal(rng);
    c.y = c.X * (beta + u);
    for (Index r = 0; r < n; ++r) c.y[r] += normal(rng);
    c.w = Eigen::VectorXd::Ones(n);
    if (shape.random_weights) {
      for (Index r = 0; r < n; ++r) c.w[r] = weight(rng);
    }
    clusters.push_back(std::move(c));
  }
  Dataset raw(std::move(clusters), Family::Gaussian);
  return shape.standardized ? glmmsel::standardize(raw) : raw;
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, Index p, double sd = 0.5) {
  std::normal_distribution<double> normal(0.0, sd);
  Eigen::VectorXd v(p);
  for (Index k = 0; k < p; ++k) v[k] = normal(rng);
  return v;
}

inline Eigen::VectorXd random_gamma(std::mt19937_64& rng, Index p, double zero_prob = 0.3) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd g(p);
  for (Index k = 0; k < p; ++k) g[k] = unit(rng) < zero_prob ? 0.0 : std::exp(2.0 * unit(rng) - 1.5);
  return g;
}

}  // namespace support

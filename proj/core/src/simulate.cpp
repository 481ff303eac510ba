#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "glmmsel/dataset.hpp"
#include "glmmsel/errors.hpp"

namespace glmmsel {

void SimConfig::validate() const {
  if (n_total < 1) raise(ErrorKind::InvalidConfig, "n_total must be positive");
  if (p < 1) raise(ErrorKind::InvalidConfig, "p must be positive");
  if (s_fixed < 0 || s_random < 0) raise(ErrorKind::InvalidConfig, "support sizes must be nonnegative");
  if (s_fixed > p) raise(ErrorKind::InvalidConfig, "s_fixed exceeds p");
  if (s_random > s_fixed) {
    raise(ErrorKind::InvalidConfig, "s_random exceeds s_fixed (random effects require fixed effects)");
  }
  if (!(rho >= 0.0 && rho < 1.0)) raise(ErrorKind::InvalidConfig, "rho must lie in [0, 1)");
  if (family == Family::Poisson) raise(ErrorKind::Unsupported, "poisson responses are not supported");
}

namespace {

class Simulator {
 public:
  explicit Simulator(const SimConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {
    cfg_.validate();
    m_ = (cfg_.n_total + 9) / 10;
    draw_truth();
  }

  const GroundTruth& truth() const { return truth_; }

  // One sample of cfg.n_total observations over the fixed cluster set. Gaussian
  // noise uses the stored variance, or sets it from this sample when unset.
  Dataset draw_sample() {
    std::vector<Index> assignment = assign_clusters();
    const Index n = cfg_.n_total;
    const Index p = cfg_.p;

    std::vector<Index> counts(static_cast<std::size_t>(m_), 0);
    for (Index a : assignment) ++counts[static_cast<std::size_t>(a)];

    std::vector<ClusterData> clusters(static_cast<std::size_t>(m_));
    for (Index i = 0; i < m_; ++i) {
      auto& c = clusters[static_cast<std::size_t>(i)];
      c.id = "c" + std::to_string(i + 1);
      c.X.resize(counts[static_cast<std::size_t>(i)], p);
      c.y.resize(counts[static_cast<std::size_t>(i)]);
      c.w = Eigen::VectorXd::Ones(counts[static_cast<std::size_t>(i)]);
    }

    std::vector<Index> fill(static_cast<std::size_t>(m_), 0);
    Eigen::VectorXd eta_all(n);
    const double innov = std::sqrt(1.0 - cfg_.rho * cfg_.rho);
    for (Index obs = 0; obs < n; ++obs) {
      const Index i = assignment[static_cast<std::size_t>(obs)];
      auto& c = clusters[static_cast<std::size_t>(i)];
      const Index row = fill[static_cast<std::size_t>(i)]++;
      double prev = normal_(rng_);
      c.X(row, 0) = prev;
      for (Index k = 1; k < p; ++k) {
        prev = cfg_.rho * prev + innov * normal_(rng_);
        c.X(row, k) = prev;
      }
      const Eigen::VectorXd coef = truth_.beta0 + truth_.u[static_cast<std::size_t>(i)];
      eta_all[obs] = c.X.row(row).dot(coef);
      c.y[row] = eta_all[obs];
    }

    if (cfg_.family == Family::Gaussian) {
      if (truth_.sigma2 <= 0.0) {
        double var = 0.0;
        if (n > 1) {
          const double mean = eta_all.mean();
          var = (eta_all.array() - mean).square().sum() / static_cast<double>(n - 1);
        }
        truth_.sigma2 = var > 0.0 ? var : 1.0;
      }
      const double sd = std::sqrt(truth_.sigma2);
      for (auto& c : clusters) {
        for (Index j = 0; j < c.size(); ++j) c.y[j] += sd * normal_(rng_);
      }
    } else {
      for (auto& c : clusters) {
        for (Index j = 0; j < c.size(); ++j) {
          const double prob = 1.0 / (1.0 + std::exp(-c.y[j]));
          c.y[j] = uniform_(rng_) < prob ? 1.0 : 0.0;
        }
      }
    }
    return Dataset(std::move(clusters), cfg_.family);
  }

 private:
  void draw_truth() {
    const Index p = cfg_.p;
    std::vector<Index> perm(static_cast<std::size_t>(p));
    std::iota(perm.begin(), perm.end(), Index{0});
    // Partial Fisher-Yates: the first s_fixed entries form the fixed support and
    // the first s_random of those the random support.
    for (Index j = 0; j < cfg_.s_fixed; ++j) {
      std::uniform_int_distribution<Index> pick(j, p - 1);
      std::swap(perm[static_cast<std::size_t>(j)], perm[static_cast<std::size_t>(pick(rng_))]);
    }
    truth_.beta0 = Eigen::VectorXd::Zero(p);
    truth_.gamma0 = Eigen::VectorXd::Zero(p);
    for (Index j = 0; j < cfg_.s_fixed; ++j) truth_.beta0[perm[static_cast<std::size_t>(j)]] = 1.0;
    std::shuffle(perm.begin(), perm.begin() + cfg_.s_fixed, rng_);
    for (Index j = 0; j < cfg_.s_random; ++j) truth_.gamma0[perm[static_cast<std::size_t>(j)]] = 1.0;

    truth_.u.assign(static_cast<std::size_t>(m_), Eigen::VectorXd::Zero(p));
    for (auto& u : truth_.u) {
      for (Index k = 0; k < p; ++k) {
        if (truth_.gamma0[k] > 0.0) u[k] = std::sqrt(truth_.gamma0[k]) * normal_(rng_);
      }
    }
    truth_.sigma2 = 0.0;
  }

  // Multinomial-uniform assignment; empty clusters take one observation from
  // the currently largest cluster.
  std::vector<Index> assign_clusters() {
    const Index n = cfg_.n_total;
    std::uniform_int_distribution<Index> pick(0, m_ - 1);
    std::vector<Index> assignment(static_cast<std::size_t>(n));
    std::vector<Index> counts(static_cast<std::size_t>(m_), 0);
    for (auto& a : assignment) {
      a = pick(rng_);
      ++counts[static_cast<std::size_t>(a)];
    }
    for (Index i = 0; i < m_; ++i) {
      if (counts[static_cast<std::size_t>(i)] > 0) continue;
      const auto largest = static_cast<Index>(
          std::max_element(counts.begin(), counts.end()) - counts.begin());
      for (auto& a : assignment) {
        if (a == largest) {
          a = i;
          break;
        }
      }
      --counts[static_cast<std::size_t>(largest)];
      ++counts[static_cast<std::size_t>(i)];
    }
    return assignment;
  }

  SimConfig cfg_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  Index m_ = 1;
  GroundTruth truth_;
};

}  // namespace

SyntheticData generate_synthetic(const SimConfig& cfg) {
  Simulator sim(cfg);
  Dataset data = sim.draw_sample();
  return {std::move(data), sim.truth()};
}

SyntheticStudy generate_study(const SimConfig& cfg) {
  Simulator sim(cfg);
  Dataset train = sim.draw_sample();
  Dataset validation = sim.draw_sample();
  Dataset test = sim.draw_sample();
  return {std::move(train), std::move(validation), std::move(test), sim.truth()};
}

}  // namespace glmmsel

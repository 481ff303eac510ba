// Acceptance suite: one pass/fail line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "glmmsel/covariance.hpp"
#include "glmmsel/evaluation.hpp"
#include "glmmsel/local_search.hpp"
#include "glmmsel/path.hpp"
#include "glmmsel/threshold.hpp"
#include "oracles/dense_model.hpp"
#include "oracles/exhaustive.hpp"
#include "oracles/threshold_oracle.hpp"
#include "support/instances.hpp"

using namespace glmmsel;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int worker_count() { return std::max(1, static_cast<int>(std::thread::hardware_concurrency())); }

bool nonincreasing(const std::vector<double>& trace) {
  for (std::size_t t = 1; t < trace.size(); ++t) {
    if (trace[t] > trace[t - 1] + 1e-10 * std::max(1.0, std::abs(trace[t - 1]))) return false;
  }
  return true;
}

Outcome threshold_equivalence() {
  std::mt19937_64 rng(20240601);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int agree = 0;
  constexpr int kTuples = 10000;
  for (int i = 0; i < kTuples; ++i) {
    const double b = normal(rng), g = normal(rng);
    const double lambda = std::exp(2.0 * normal(rng) - 1.0);
    const double alpha = 0.01 + 0.99 * unit(rng);
    const double lbar = std::exp(normal(rng));
    agree += threshold(b, g, lambda, alpha, lbar) == oracle::threshold_by_enumeration(b, g, lambda, alpha, lbar);
  }
  return {agree == kTuples, fmt("%d/%d tuples agree", agree, kTuples)};
}

Outcome gradient_correctness() {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<Index> m_dist(1, 3), p_dist(1, 8);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    support::InstanceShape shape;
    shape.m = m_dist(rng);
    shape.min_ni = 1;
    shape.max_ni = 6;
    shape.p = p_dist(rng);
    shape.random_weights = rep % 3 == 0;
    const Dataset d = support::random_dataset(rng, shape);
    const Eigen::VectorXd beta = support::random_vector(rng, d.p());
    const Eigen::VectorXd gamma = support::random_gamma(rng, d.p(), 0.0).array() + 0.05;
    const CovarianceState s = build_state(d, gamma);
    const ModelFit f = make_fit(d, s, beta, gamma);
    for (Index k = 0; k < d.p(); ++k) {
      const BlockGradient g = grad_block(d, f, s, k);
      const auto [fb, fg] = oracle::fd_gradient(d, beta, gamma, k);
      worst = std::max(worst, std::abs(g.beta - fb) / std::max(1.0, std::abs(fb)));
      worst = std::max(worst, std::abs(g.gamma - fg) / std::max(1.0, std::abs(fg)));
    }
  }
  return {worst < 1e-5, fmt("max relative error %.2e over 100 instances", worst)};
}

Outcome rank_one_maintenance() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    support::InstanceShape shape;
    shape.m = 4;
    shape.max_ni = 8;
    shape.p = 6;
    shape.random_weights = rep % 2 == 0;
    const Dataset d = support::random_dataset(rng, shape);
    CovarianceState s = build_state(d, Eigen::VectorXd::Zero(d.p()));
    for (int e = 0; e < 100; ++e) {
      const Index k = static_cast<Index>(unit(rng) * static_cast<double>(d.p()));
      const double target = unit(rng) < 0.3 ? 0.0 : std::exp(3.0 * unit(rng) - 2.0);
      rank_one_update(s, d, k, target - s.gamma()[k]);
    }
    for (Index i = 0; i < d.m(); ++i) {
      const Eigen::MatrixXd v = oracle::dense_cov(d.cluster(i), s.gamma());
      worst = std::max(worst, (s.cluster(i).inv - v.inverse()).cwiseAbs().maxCoeff());
      worst = std::max(worst, std::abs(s.cluster(i).logdet - std::log(v.determinant())));
    }
  }
  return {worst < 1e-8, fmt("max abs deviation %.2e after 100 edits x 20 instances", worst)};
}

Outcome monotone_descent() {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int good = 0;
  for (int rep = 0; rep < 50; ++rep) {
    support::InstanceShape shape;
    shape.m = 8;
    shape.min_ni = 4;
    shape.max_ni = 10;
    shape.p = 12;
    const Dataset d = support::random_dataset(rng, shape);
    SolverConfig cfg;
    cfg.lambda = std::exp(4.0 * unit(rng) - 2.0);
    cfg.alpha = 0.1 + 0.9 * unit(rng);
    const FitResult cd = fit_cd(d, cfg);
    const FitResult ls = fit_cd_ls(d, cfg);
    good += nonincreasing(cd.trace) && nonincreasing(ls.trace);
  }
  return {good == 50, fmt("%d/50 fits nonincreasing under both CD and CD+LS", good)};
}

Outcome small_instance_optimality() {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int within = 0;
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    support::InstanceShape shape;
    shape.m = 6;
    shape.min_ni = 3;
    shape.max_ni = 8;
    shape.p = 2;
    shape.signal = 0.3 + unit(rng);
    shape.random_sd = 1.5 * unit(rng);
    const Dataset d = support::random_dataset(rng, shape);
    const double alpha = 0.1 + 0.9 * unit(rng);
    FitState null_state(d, Coefficients::zeros(d.p()));
    const double lambda = next_lambda(null_state, alpha, 1.0) * (0.05 + 0.9 * unit(rng));
    SolverConfig cfg;
    cfg.lambda = lambda;
    cfg.alpha = alpha;
    cfg.tol = 1e-12;
    cfg.max_cycles = 20000;
    const FitResult fit = fit_cd_ls(d, cfg);
    const auto best = oracle::exhaustive_optimum(d, lambda, alpha);
    const double gap = fit.objective - best.objective;
    worst = std::max(worst, gap);
    within += std::abs(gap) <= 1e-6;
  }
  return {within >= 95, fmt("%d/100 instances within 1e-6 of the oracle (largest excess %.2e)", within, worst)};
}

Outcome path_contract() {
  int slices = 0, bad = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SimConfig sim;
    sim.n_total = 200;
    sim.p = 40;
    sim.rho = 0.5;
    sim.seed = seed;
    const Dataset d = standardize(generate_synthetic(sim).data);
    const PathResult path = fit_path(d, PathConfig{});
    for (const auto& slice : path.slices) {
      ++slices;
      bool ok = !slice.entries.empty() && slice.entries.front().active.size() == 0 &&
                slice.entries.front().coef.beta.isZero(0.0) && slice.entries.front().coef.gamma.isZero(0.0);
      for (std::size_t e = 1; ok && e < slice.entries.size(); ++e) {
        ok = slice.entries[e].active != slice.entries[e - 1].active;
      }
      bad += !ok;
    }
  }
  return {bad == 0, fmt("%d/%d alpha slices satisfy the contract over 20 paths", slices - bad, slices)};
}

ExperimentCell cell(Index n, Index p, double rho, Family family, Method method) {
  ExperimentCell c;
  c.n_total = n;
  c.p = p;
  c.rho = rho;
  c.family = family;
  c.method = method;
  return c;
}

Outcome gaussian_reproduction() {
  ExperimentSpec spec;
  spec.cells = {cell(1000, 100, 0.5, Family::Gaussian, Method::Cd)};
  spec.replicates = 20;
  spec.seed = 1;
  spec.threads = worker_count();
  const CellResult r = run_experiment(spec).cells[0];
  const double f1e = r.metric("f1_effect_type").mean;
  const double f1n = r.metric("f1_nonzero").mean;
  const double pe = r.metric("prediction_error").mean;
  const bool pass = r.failures == 0 && f1e >= 0.75 && f1n >= 0.85 && pe <= 0.25;
  return {pass, fmt("F1 effect %.3f (>= 0.75), F1 nonzero %.3f (>= 0.85), PE %.3f (<= 0.25), failures %d", f1e, f1n,
                    pe, r.failures)};
}

Outcome bernoulli_reproduction() {
  ExperimentSpec spec;
  spec.cells = {cell(1000, 50, 0.5, Family::Bernoulli, Method::Cd)};
  spec.replicates = 20;
  spec.seed = 1;
  spec.threads = worker_count();
  const CellResult r = run_experiment(spec).cells[0];
  const double f1n = r.metric("f1_nonzero").mean;
  const double pe = r.metric("prediction_error").mean;
  const bool pass = r.failures == 0 && f1n >= 0.6 && pe < 1.0;
  return {pass, fmt("F1 nonzero %.3f (>= 0.6), PE %.3f (< 1), failures %d", f1n, pe, r.failures)};
}

Outcome local_search_correlation() {
  constexpr int kReplicates = 20;
  constexpr std::uint64_t kSeed = 1;
  ExperimentSpec spec;
  spec.cells = {cell(500, 100, 0.9, Family::Gaussian, Method::Cd), cell(500, 100, 0.9, Family::Gaussian, Method::CdLs)};
  spec.replicates = kReplicates;
  spec.seed = kSeed;
  spec.threads = worker_count();
  const ExperimentResult res = run_experiment(spec);
  const double f1_cd = res.cells[0].metric("f1_effect_type").mean;
  const double f1_ls = res.cells[1].metric("f1_effect_type").mean;

  // Objectives at the (lambda, alpha) each CD replicate selected, both solvers
  // started from the null model on the same training sample.
  int not_worse = 0;
  for (int r = 0; r < kReplicates; ++r) {
    const ReplicateResult& rep = res.cells[0].replicates[static_cast<std::size_t>(r)];
    if (!rep.ok) continue;
    SimConfig sim;
    sim.n_total = 500;
    sim.p = 100;
    sim.rho = 0.9;
    sim.seed = replicate_seed(kSeed, r);
    const Dataset train = standardize(generate_study(sim).train);
    SolverConfig cfg;
    cfg.lambda = rep.lambda;
    cfg.alpha = rep.alpha;
    const FitResult cd = fit_cd(train, cfg);
    const FitResult ls = fit_cd_ls(train, cfg);
    not_worse += ls.objective <= cd.objective + 1e-10 * std::abs(cd.objective);
  }
  const bool pass = not_worse == kReplicates && f1_ls >= f1_cd - 0.02 && res.cells[0].failures == 0 &&
                    res.cells[1].failures == 0;
  return {pass, fmt("CD+LS objective <= CD on %d/%d replicates; F1 effect cd %.3f, cd_ls %.3f", not_worse, kReplicates,
                    f1_cd, f1_ls)};
}

Outcome complexity_scaling() {
  constexpr int kSeeds = 5;
  const std::vector<Index> ps = {500, 1000, 2000};
  std::vector<double> mean_seconds;
  std::vector<double> mean_fits;
  for (Index p : ps) {
    double total = 0.0, fits = 0.0;
    for (int s = 0; s < kSeeds; ++s) {
      SimConfig sim;
      sim.n_total = 100;
      sim.p = p;
      sim.seed = 1000 + static_cast<std::uint64_t>(s);
      const Dataset d = standardize(generate_synthetic(sim).data);
      PathConfig cfg;
      cfg.alphas = {0.5};
      const auto start = std::chrono::steady_clock::now();
      const PathResult path = fit_path(d, cfg);
      total += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      fits += static_cast<double>(path.size());
    }
    mean_seconds.push_back(total / kSeeds);
    mean_fits.push_back(fits / kSeeds);
  }
  const double r1 = mean_seconds[1] / mean_seconds[0];
  const double r2 = mean_seconds[2] / mean_seconds[1];
  const bool pass = r1 <= 2.6 && r2 <= 2.6 && mean_seconds[2] < 60.0;
  return {pass, fmt("mean path seconds %.3f / %.3f / %.3f (fits %.1f / %.1f / %.1f); ratios %.2f, %.2f (<= 2.6)",
                    mean_seconds[0], mean_seconds[1], mean_seconds[2], mean_fits[0], mean_fits[1], mean_fits[2], r1,
                    r2)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "threshold oracle equivalence", 1.0, threshold_equivalence},
      {2, "gradient correctness", 5.0, gradient_correctness},
      {3, "rank-one maintenance", 5.0, rank_one_maintenance},
      {4, "monotone descent", 30.0, monotone_descent},
      {5, "small-instance global optimality", 60.0, small_instance_optimality},
      {6, "path contract", 60.0, path_contract},
      {7, "gaussian desk-scale reproduction", 600.0, gaussian_reproduction},
      {8, "bernoulli desk-scale reproduction", 900.0, bernoulli_reproduction},
      {9, "local search under correlation", 900.0, local_search_correlation},
      {10, "complexity scaling", 180.0, complexity_scaling},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = seconds <= c.budget_seconds;
    const bool pass = o.pass && in_budget;
    failed += !pass;
    std::printf("[%s] %2d %s: %s; %.2f s (budget %.0f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                o.detail.c_str(), seconds, c.budget_seconds, in_budget ? "" : ", exceeded");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

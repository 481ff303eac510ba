#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

#include "glmmsel/errors.hpp"
#include "glmmsel/evaluation.hpp"

namespace glmmsel {

std::string_view to_string(Method method) noexcept { return method == Method::CdLs ? "cd_ls" : "cd"; }

Method parse_method(std::string_view name) {
  if (name == "cd") return Method::Cd;
  if (name == "cd_ls" || name == "cd-ls") return Method::CdLs;
  raise(ErrorKind::InvalidConfig, "unknown method '" + std::string(name) + "'");
}

namespace {

constexpr std::array<std::string_view, 4> kMetrics = {"prediction_error", "f1_effect_type", "f1_nonzero",
                                                      "sparsity"};

double metric_value(const ReplicateResult& r, std::size_t metric) {
  switch (metric) {
    case 0: return r.prediction_error;
    case 1: return r.f1_effect_type;
    case 2: return r.f1_nonzero;
    default: return r.sparsity;
  }
}

MetricSummary summarize_metric(const std::vector<ReplicateResult>& reps, std::size_t metric) {
  MetricSummary s;
  s.metric = std::string(kMetrics[metric]);
  double sum = 0.0;
  for (const auto& r : reps) {
    if (!r.ok) continue;
    sum += metric_value(r, metric);
    ++s.n;
  }
  if (s.n == 0) return s;
  s.mean = sum / s.n;
  if (s.n > 1) {
    double ss = 0.0;
    for (const auto& r : reps) {
      if (r.ok) ss += std::pow(metric_value(r, metric) - s.mean, 2);
    }
    s.se = std::sqrt(ss / (s.n - 1)) / std::sqrt(static_cast<double>(s.n));
  }
  return s;
}

}  // namespace

std::span<const std::string_view> experiment_metrics() noexcept { return kMetrics; }

std::uint64_t replicate_seed(std::uint64_t seed, int replicate) noexcept {
  return seed + 7919ULL * static_cast<std::uint64_t>(replicate);
}

const MetricSummary& CellResult::metric(std::string_view name) const {
  for (const auto& m : metrics) {
    if (m.metric == name) return m;
  }
  raise(ErrorKind::InvalidConfig, "unknown metric '" + std::string(name) + "'");
}

ReplicateResult run_replicate(const ExperimentCell& cell, const PathConfig& path, std::uint64_t seed) {
  ReplicateResult r;
  try {
    SimConfig sim;
    sim.n_total = cell.n_total;
    sim.p = cell.p;
    sim.rho = cell.rho;
    sim.family = cell.family;
    sim.s_fixed = cell.s_fixed;
    sim.s_random = cell.s_random;
    sim.seed = seed;
    const SyntheticStudy study = generate_study(sim);
    const Dataset train = standardize(study.train);
    const Dataset validation = apply_scales(study.validation, train.scales());
    const Dataset test = apply_scales(study.test, train.scales());

    PathConfig cfg = path;
    cfg.local_search = cell.method == Method::CdLs;
    cfg.threads = 1;
    const auto start = std::chrono::steady_clock::now();
    const PathResult fitted = fit_path(train, cfg);
    const TuneResult tuned = tune(fitted, validation);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const PathEntry& chosen = tuned.chosen(fitted);
    r.lambda = chosen.lambda;
    r.alpha = chosen.alpha;
    r.prediction_error = prediction_error(true_linear_predictor(test, study.truth),
                                          fitted_linear_predictor(test, chosen, fitted.cluster_ids));
    const SelectionScores scores = selection_scores(study.truth, chosen.coef);
    r.f1_effect_type = scores.f1_effect_type;
    r.f1_nonzero = scores.f1_nonzero;
    r.sparsity = scores.sparsity;
    r.ok = true;
  } catch (const Error& e) {
    r.error = e.what();
  }
  return r;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  if (spec.replicates < 1) raise(ErrorKind::InvalidConfig, "replicates must be positive");
  if (spec.threads < 1) raise(ErrorKind::InvalidConfig, "threads must be positive");
  spec.path.validate();

  ExperimentResult out;
  out.cells.resize(spec.cells.size());
  const std::size_t reps = static_cast<std::size_t>(spec.replicates);
  const std::size_t jobs = spec.cells.size() * reps;
  for (std::size_t c = 0; c < spec.cells.size(); ++c) {
    out.cells[c].cell = spec.cells[c];
    out.cells[c].replicates.resize(reps);
  }
  auto work = [&](std::size_t job) {
    const std::size_t c = job / reps;
    const int r = static_cast<int>(job % reps);
    out.cells[c].replicates[static_cast<std::size_t>(r)] =
        run_replicate(spec.cells[c], spec.path, replicate_seed(spec.seed, r));
  };
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(spec.threads), jobs);
  if (workers <= 1) {
    for (std::size_t j = 0; j < jobs; ++j) work(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        for (std::size_t j = next++; j < jobs; j = next++) work(j);
      });
    }
    for (auto& th : pool) th.join();
  }

  for (auto& cell : out.cells) {
    for (std::size_t m = 0; m < kMetrics.size(); ++m) cell.metrics.push_back(summarize_metric(cell.replicates, m));
    double seconds = 0.0;
    int ok = 0;
    for (const auto& r : cell.replicates) {
      if (r.ok) {
        seconds += r.seconds;
        ++ok;
      } else {
        ++cell.failures;
      }
    }
    cell.seconds_mean = ok > 0 ? seconds / ok : 0.0;
  }
  return out;
}

}  // namespace glmmsel

#include "glmmsel/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "glmmsel/errors.hpp"

namespace glmmsel {

double prediction_error(std::span<const Eigen::VectorXd> truth, std::span<const Eigen::VectorXd> fitted) {
  if (truth.size() != fitted.size()) raise(ErrorKind::InvalidConfig, "cluster counts differ");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i].size() != fitted[i].size()) raise(ErrorKind::InvalidConfig, "cluster sizes differ");
    num += (truth[i] - fitted[i]).squaredNorm();
    den += truth[i].squaredNorm();
  }
  if (!(den >= 1e-300)) raise(ErrorKind::NullTruth, "true linear predictor is identically zero");
  return num / den;
}

double f1_score(std::size_t tp, std::size_t fp, std::size_t fn) {
  const double denom = static_cast<double>(2 * tp + fp + fn);
  return denom == 0.0 ? 1.0 : 2.0 * static_cast<double>(tp) / denom;
}

namespace {

int role(double beta, double gamma) { return gamma != 0.0 ? 2 : (beta != 0.0 ? 1 : 0); }

}  // namespace

SelectionScores selection_scores(const GroundTruth& truth, const Coefficients& fit) {
  const Index p = truth.beta0.size();
  if (fit.beta.size() != p) raise(ErrorKind::InvalidConfig, "truth and fit have different p");
  std::size_t tp_role = 0, fp_role = 0, fn_role = 0;
  std::size_t tp_nz = 0, fp_nz = 0, fn_nz = 0;
  std::size_t selected = 0;
  for (Index k = 0; k < p; ++k) {
    const int t = role(truth.beta0[k], truth.gamma0[k]);
    const int f = role(fit.beta[k], fit.gamma[k]);
    if (f != 0) ++selected;
    if (t != 0 && f != 0) ++tp_nz;
    if (t == 0 && f != 0) ++fp_nz;
    if (t != 0 && f == 0) ++fn_nz;
    if (t != 0 && f == t) {
      ++tp_role;
    } else {
      if (f != 0) ++fp_role;
      if (t != 0) ++fn_role;
    }
  }
  return {static_cast<double>(selected), f1_score(tp_role, fp_role, fn_role), f1_score(tp_nz, fp_nz, fn_nz)};
}

std::vector<Eigen::VectorXd> fitted_linear_predictor(const Dataset& data, const PathEntry& entry,
                                                     std::span<const std::string> cluster_ids) {
  std::unordered_map<std::string, Index> known;
  for (std::size_t i = 0; i < cluster_ids.size(); ++i) known.emplace(cluster_ids[i], static_cast<Index>(i));
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(data.m()));
  for (const auto& c : data.clusters()) {
    const auto it = known.find(c.id);
    if (it == known.end() || entry.blup_predictors.empty()) {
      out.emplace_back(c.X * entry.coef.beta);
    } else {
      out.emplace_back(c.X * (entry.coef.beta + entry.blup(it->second)));
    }
  }
  return out;
}

double validation_loss(const Dataset& validation, const PathEntry& entry,
                       std::span<const std::string> cluster_ids, Family family) {
  const auto eta = fitted_linear_predictor(validation, entry, cluster_ids);
  double loss = 0.0;
  for (Index i = 0; i < validation.m(); ++i) {
    const auto& y = validation.cluster(i).y;
    const auto& e = eta[static_cast<std::size_t>(i)];
    if (family == Family::Bernoulli) {
      for (Index r = 0; r < y.size(); ++r) {
        const double mu = std::clamp(1.0 / (1.0 + std::exp(-e[r])), 1e-15, 1.0 - 1e-15);
        loss -= y[r] * std::log(mu) + (1.0 - y[r]) * std::log1p(-mu);
      }
    } else {
      loss += (y - e).squaredNorm();
    }
  }
  return loss / static_cast<double>(validation.n_total());
}

TuneResult tune(const PathResult& path, const Dataset& validation) {
  if (path.size() == 0) raise(ErrorKind::EmptyPath, "path has no fits");
  if (path.scales.size() == validation.p() &&
      !path.scales.isApprox(validation.scales(), 1e-12)) {
    raise(ErrorKind::InvalidConfig, "validation data must be standardized with the training scales");
  }
  TuneResult out;
  out.losses.resize(path.slices.size());
  bool have = false;
  for (std::size_t s = 0; s < path.slices.size(); ++s) {
    const auto& entries = path.slices[s].entries;
    for (std::size_t e = 0; e < entries.size(); ++e) {
      const double loss = validation_loss(validation, entries[e], path.cluster_ids, path.family);
      out.losses[s].push_back(loss);
      bool better = !have || loss < out.loss;
      if (have && loss == out.loss) {
        const auto& cur = path.slices[out.slice].entries[out.entry];
        better = entries[e].active.size() < cur.active.size() ||
                 (entries[e].active.size() == cur.active.size() && entries[e].lambda > cur.lambda);
      }
      if (better) {
        out.slice = s;
        out.entry = e;
        out.loss = loss;
        have = true;
      }
    }
  }
  return out;
}

}  // namespace glmmsel

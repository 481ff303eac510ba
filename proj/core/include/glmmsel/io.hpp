#pragma once

#include <string>
#include <vector>

#include "glmmsel/dataset.hpp"
#include "glmmsel/evaluation.hpp"
#include "glmmsel/path.hpp"

namespace glmmsel {

/// Predictor names x1..xp.
std::vector<std::string> default_predictor_names(Index p);

/// One row per fit: alpha, lambda, nnz_fixed, nnz_random, objective, sigma2_hat.
void write_path_table(const std::string& path, const PathResult& result);

/// Nonzero coefficients of every fit keyed by (alpha, lambda). Original scale
/// unless `standardized`.
void write_coefficient_archive(const std::string& path, const PathResult& result,
                               const std::vector<std::string>& names, bool standardized = false);

/// Every predictor's (beta, gamma), written with round-trip precision.
void write_coefficients(const std::string& path, const std::vector<std::string>& names,
                        const Coefficients& coef);

struct NamedCoefficients {
  std::vector<std::string> names;
  Coefficients coef;
};
NamedCoefficients read_coefficients(const std::string& path);

/// Long table of cluster, predictor, blup for predictors with a random effect.
void write_blups(const std::string& path, const PathEntry& entry, const std::vector<std::string>& cluster_ids,
                 const std::vector<std::string>& names, const Eigen::VectorXd& scales);

/// Key/value summary of a chosen fit.
void write_fit_summary(const std::string& path, const PathEntry& entry, double validation_loss);

/// predictor, beta0, gamma0 for every predictor.
void write_truth(const std::string& path, const GroundTruth& truth, const std::vector<std::string>& names);

/// Cell parameters, metric, mean, se, n_replicates, seconds_mean.
void write_results_table(const std::string& path, const ExperimentResult& result);

}  // namespace glmmsel

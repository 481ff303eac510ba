#include "glmmsel/io.hpp"

#include <fstream>

#include "glmmsel/csv.hpp"
#include "glmmsel/errors.hpp"

namespace glmmsel {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) raise(ErrorKind::Io, "cannot write '" + path + "'");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) raise(ErrorKind::Io, "failed writing '" + path + "'");
}

Coefficients scaled(const Coefficients& coef, const Eigen::VectorXd& scales, bool standardized) {
  if (standardized || scales.size() != coef.beta.size()) return coef;
  return to_original_scale(coef, scales);
}

}  // namespace

std::vector<std::string> default_predictor_names(Index p) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(p));
  for (Index k = 0; k < p; ++k) names.push_back("x" + std::to_string(k + 1));
  return names;
}

void write_path_table(const std::string& path, const PathResult& result) {
  auto out = open_out(path);
  out << "alpha,lambda,nnz_fixed,nnz_random,objective,sigma2_hat\n";
  for (const auto& slice : result.slices) {
    for (const auto& e : slice.entries) {
      out << format_double(e.alpha) << ',' << format_double(e.lambda) << ',' << e.active.size() << ','
          << e.active.random_count() << ',' << format_double(e.objective) << ',' << format_double(e.sigma2)
          << '\n';
    }
  }
  finish(out, path);
}

void write_coefficient_archive(const std::string& path, const PathResult& result,
                               const std::vector<std::string>& names, bool standardized) {
  auto out = open_out(path);
  out << "alpha,lambda,predictor,beta,gamma\n";
  for (const auto& slice : result.slices) {
    for (const auto& e : slice.entries) {
      const Coefficients coef = scaled(e.coef, result.scales, standardized);
      for (Index k : e.active.predictors) {
        out << format_double(e.alpha) << ',' << format_double(e.lambda) << ','
            << names[static_cast<std::size_t>(k)] << ',' << format_double(coef.beta[k]) << ','
            << format_double(coef.gamma[k]) << '\n';
      }
    }
  }
  finish(out, path);
}

void write_coefficients(const std::string& path, const std::vector<std::string>& names,
                        const Coefficients& coef) {
  auto out = open_out(path);
  out << "predictor,beta,gamma\n";
  for (Index k = 0; k < coef.beta.size(); ++k) {
    out << names[static_cast<std::size_t>(k)] << ',' << format_double(coef.beta[k]) << ','
        << format_double(coef.gamma[k]) << '\n';
  }
  finish(out, path);
}

NamedCoefficients read_coefficients(const std::string& path) {
  const CsvTable table = read_csv_table(path);
  const std::size_t name_col = table.column("predictor");
  const std::size_t beta_col = table.column("beta");
  const std::size_t gamma_col = table.column("gamma");
  NamedCoefficients out;
  const auto p = static_cast<Index>(table.rows.size());
  out.coef = Coefficients::zeros(p);
  for (Index k = 0; k < p; ++k) {
    const auto& row = table.rows[static_cast<std::size_t>(k)];
    const std::size_t line = table.line_numbers[static_cast<std::size_t>(k)];
    out.names.push_back(row[name_col]);
    out.coef.beta[k] = parse_number(row[beta_col], line, "beta");
    out.coef.gamma[k] = parse_number(row[gamma_col], line, "gamma");
  }
  return out;
}

void write_blups(const std::string& path, const PathEntry& entry, const std::vector<std::string>& cluster_ids,
                 const std::vector<std::string>& names, const Eigen::VectorXd& scales) {
  auto out = open_out(path);
  out << "cluster,predictor,blup\n";
  for (std::size_t i = 0; i < cluster_ids.size(); ++i) {
    for (std::size_t j = 0; j < entry.blup_predictors.size(); ++j) {
      const Index k = entry.blup_predictors[j];
      double u = entry.blups(static_cast<Index>(i), static_cast<Index>(j));
      if (scales.size() > k) u /= scales[k];
      out << cluster_ids[i] << ',' << names[static_cast<std::size_t>(k)] << ',' << format_double(u) << '\n';
    }
  }
  finish(out, path);
}

void write_fit_summary(const std::string& path, const PathEntry& entry, double validation_loss) {
  auto out = open_out(path);
  out << "key,value\n";
  out << "alpha," << format_double(entry.alpha) << '\n';
  out << "lambda," << format_double(entry.lambda) << '\n';
  out << "objective," << format_double(entry.objective) << '\n';
  out << "neg_log_likelihood," << format_double(entry.nll) << '\n';
  out << "sigma2_hat," << format_double(entry.sigma2) << '\n';
  out << "nnz_fixed," << entry.active.size() << '\n';
  out << "nnz_random," << entry.active.random_count() << '\n';
  out << "validation_loss," << format_double(validation_loss) << '\n';
  finish(out, path);
}

void write_truth(const std::string& path, const GroundTruth& truth, const std::vector<std::string>& names) {
  auto out = open_out(path);
  out << "predictor,beta0,gamma0\n";
  for (Index k = 0; k < truth.beta0.size(); ++k) {
    out << names[static_cast<std::size_t>(k)] << ',' << format_double(truth.beta0[k]) << ','
        << format_double(truth.gamma0[k]) << '\n';
  }
  finish(out, path);
}

void write_results_table(const std::string& path, const ExperimentResult& result) {
  auto out = open_out(path);
  out << "n_total,p,rho,family,method,metric,mean,se,n_replicates,seconds_mean\n";
  for (const auto& cell : result.cells) {
    for (const auto& m : cell.metrics) {
      out << cell.cell.n_total << ',' << cell.cell.p << ',' << format_double(cell.cell.rho) << ','
          << to_string(cell.cell.family) << ',' << to_string(cell.cell.method) << ',' << m.metric << ','
          << format_double(m.mean) << ',' << format_double(m.se) << ',' << m.n << ','
          << format_double(cell.seconds_mean) << '\n';
    }
  }
  finish(out, path);
}

}  // namespace glmmsel

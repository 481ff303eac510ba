#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "glmmsel/csv.hpp"
#include "glmmsel/dataset.hpp"
#include "glmmsel/errors.hpp"
#include "glmmsel/evaluation.hpp"
#include "glmmsel/io.hpp"
#include "glmmsel/path.hpp"

namespace glmmsel::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

const std::vector<std::string> kFamilies = {"gaussian", "bernoulli", "poisson"};

struct DataOptions {
  std::string data;
  std::string cluster;
  std::string response;
  std::vector<std::string> predictors;
  std::string family = "gaussian";
};

struct PathOptions {
  int alpha_grid = 10;
  int n_lambda = 100;
  double c = 0.95;
  bool local_search = false;
  int max_cycles = 100;
  double tol = 1e-5;
  int threads = 1;
};

struct FitOptions {
  DataOptions data;
  PathOptions path;
  std::string validation;
  std::string out;
  bool raw_scale = true;
};

struct SimulateOptions {
  Index n = 1000;
  Index p = 1000;
  Index s_fixed = 5;
  Index s_random = 3;
  double rho = 0.5;
  std::string family = "gaussian";
  std::uint64_t seed = 1;
  std::string out;
};

struct EvaluateOptions {
  std::string coefficients;
  std::string truth;
  std::vector<Index> n = {1000};
  std::vector<Index> p = {100};
  std::vector<double> rho = {0.5};
  std::string family = "gaussian";
  std::vector<std::string> methods = {"cd"};
  Index s_fixed = 5;
  Index s_random = 3;
  int replicates = 1;
  std::uint64_t seed = 1;
  PathOptions path;
  std::string out;
};

struct BenchOptions {
  std::vector<Index> n = {100};
  std::vector<Index> p = {100, 200, 400, 800, 1600};
  std::vector<std::string> methods = {"cd", "cd_ls"};
  int repeats = 3;
  double alpha = 0.5;
  int n_lambda = 100;
  std::uint64_t seed = 1;
  std::string out;
};

std::vector<double> alpha_grid(int count) {
  if (count < 1) raise(ErrorKind::InvalidConfig, "--alpha-grid must be positive");
  if (count == 1) return {1.0};
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = 0.1 + 0.9 * i / (count - 1);
  out.back() = 1.0;
  return out;
}

PathConfig make_path_config(const PathOptions& o) {
  PathConfig cfg;
  cfg.alphas = alpha_grid(o.alpha_grid);
  cfg.n_lambda = o.n_lambda;
  cfg.c = o.c;
  cfg.local_search = o.local_search;
  cfg.threads = o.threads;
  cfg.solver.max_cycles = o.max_cycles;
  cfg.solver.tol = o.tol;
  return cfg;
}

json path_config_json(const PathConfig& cfg) {
  return {{"alphas", cfg.alphas},
          {"n_lambda", cfg.n_lambda},
          {"c", cfg.c},
          {"local_search", cfg.local_search},
          {"lambda_floor_ratio", cfg.lambda_floor_ratio},
          {"max_cycles", cfg.solver.max_cycles},
          {"tol", cfg.solver.tol},
          {"strong_set_size", cfg.solver.strong_set_size},
          {"pql_max_iter", cfg.pql.max_iter},
          {"pql_tol", cfg.pql.tol}};
}

void add_data_options(CLI::App* cmd, DataOptions& o) {
  cmd->add_option("--data", o.data, "Long-format CSV, one row per observation")->required();
  cmd->add_option("--cluster", o.cluster, "Cluster id column")->required();
  cmd->add_option("--response", o.response, "Response column")->required();
  cmd->add_option("--predictors", o.predictors, "Predictor columns (default: all others)")->delimiter(',');
  cmd->add_option("--family", o.family, "Response family")->check(CLI::IsMember(kFamilies));
}

void add_path_options(CLI::App* cmd, PathOptions& o) {
  cmd->add_option("--alpha-grid", o.alpha_grid, "Number of alpha values equispaced on [0.1, 1]");
  cmd->add_option("--n-lambda", o.n_lambda, "Maximum fits per alpha");
  cmd->add_option("--c", o.c, "Lambda decrease factor in [0, 1)");
  cmd->add_flag("--local-search", o.local_search, "Interleave swap local search with coordinate descent");
  cmd->add_option("--max-cycles", o.max_cycles, "Coordinate descent cycle cap per fit");
  cmd->add_option("--tol", o.tol, "Relative objective tolerance");
  cmd->add_option("--threads", o.threads, "Concurrent alpha slices")
      ->envname("GLMMSELECT_THREADS")
      ->check(CLI::PositiveNumber);
}

json manifest_base(std::string_view command) {
  return {{"tool", "glmmsel"}, {"version", GLMMSEL_VERSION}, {"command", command}};
}

void write_json(const fs::path& file, const json& doc) {
  std::ofstream out(file);
  if (!out) raise(ErrorKind::Io, "cannot write '" + file.string() + "'");
  out << doc.dump(2) << '\n';
  if (!out) raise(ErrorKind::Io, "failed writing '" + file.string() + "'");
}

fs::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) raise(ErrorKind::Io, "cannot create directory '" + dir + "': " + ec.message());
  return fs::path(dir);
}

// Predictor names in file order, excluding the cluster and response columns,
// or the explicit list.
std::vector<std::string> predictor_names(const DataOptions& o) {
  if (!o.predictors.empty()) return o.predictors;
  std::ifstream in(o.data);
  if (!in) raise(ErrorKind::Io, "cannot open '" + o.data + "'");
  std::string line;
  std::getline(in, line);
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> names;
  for (auto& h : split_csv_line(line)) {
    if (h != o.cluster && h != o.response) names.push_back(h);
  }
  return names;
}

struct LoadedData {
  Dataset raw;
  Dataset train;
  std::vector<std::string> names;
};

LoadedData load_training(const DataOptions& o) {
  const CsvSchema schema{o.cluster, o.response, o.predictors};
  Dataset raw = load_csv(o.data, schema, parse_family(o.family));
  Dataset train = standardize(raw);
  return {std::move(raw), std::move(train), predictor_names(o)};
}

json slices_json(const PathResult& path) {
  json out = json::array();
  for (const auto& s : path.slices) {
    json j = {{"alpha", s.alpha},
              {"lambda_max", s.lambda_max},
              {"fits", s.entries.size()},
              {"stop", to_string(s.stop)}};
    if (!s.error.empty()) j["error"] = s.error;
    out.push_back(std::move(j));
  }
  return out;
}

void report_slices(const PathResult& path, std::ostream& err) {
  for (const auto& s : path.slices) {
    if (!s.error.empty()) err << "warning: alpha=" << s.alpha << " slice stopped early: " << s.error << '\n';
  }
  if (path.size() == 0) raise(ErrorKind::EmptyPath, "no alpha slice produced a fit");
}

int cmd_path(const FitOptions& o, bool tune_requested, std::ostream& out, std::ostream& err) {
  const LoadedData data = load_training(o.data);
  const PathConfig cfg = make_path_config(o.path);
  const fs::path dir = prepare_dir(o.out);

  const PathResult path = fit_path(data.train, cfg);
  report_slices(path, err);
  write_path_table((dir / "path.csv").string(), path);
  write_coefficient_archive((dir / "path_coefficients.csv").string(), path, data.names, !o.raw_scale);
  std::vector<std::string> outputs = {"path.csv", "path_coefficients.csv"};

  json manifest = manifest_base(tune_requested ? "fit" : "path");
  manifest["data"] = {{"file", o.data.data},
                      {"cluster", o.data.cluster},
                      {"response", o.data.response},
                      {"family", o.data.family},
                      {"m", data.train.m()},
                      {"n_total", data.train.n_total()},
                      {"p", data.train.p()}};
  manifest["config"] = path_config_json(cfg);
  manifest["original_scale"] = o.raw_scale;
  manifest["slices"] = slices_json(path);

  if (tune_requested && !o.validation.empty()) {
    const CsvSchema schema{o.data.cluster, o.data.response, o.data.predictors};
    const Dataset validation = apply_scales(load_csv(o.validation, schema, data.train.family()),
                                            data.train.scales());
    const TuneResult tuned = tune(path, validation);
    const PathEntry& chosen = tuned.chosen(path);
    const Coefficients coef = o.raw_scale ? to_original_scale(chosen.coef, data.train.scales()) : chosen.coef;
    const Eigen::VectorXd blup_scales =
        o.raw_scale ? data.train.scales() : Eigen::VectorXd::Ones(data.train.p());
    write_coefficients((dir / "coefficients.csv").string(), data.names, coef);
    write_blups((dir / "blups.csv").string(), chosen, path.cluster_ids, data.names, blup_scales);
    write_fit_summary((dir / "fit.csv").string(), chosen, tuned.loss);

    std::ofstream losses(dir / "tuning.csv");
    losses << "alpha,lambda,validation_loss\n";
    for (std::size_t s = 0; s < path.slices.size(); ++s) {
      for (std::size_t e = 0; e < path.slices[s].entries.size(); ++e) {
        const auto& entry = path.slices[s].entries[e];
        losses << format_double(entry.alpha) << ',' << format_double(entry.lambda) << ','
               << format_double(tuned.losses[s][e]) << '\n';
      }
    }
    if (!losses) raise(ErrorKind::Io, "failed writing tuning.csv");
    outputs.insert(outputs.end(), {"coefficients.csv", "blups.csv", "fit.csv", "tuning.csv"});
    manifest["validation"] = o.validation;
    manifest["chosen"] = {{"alpha", chosen.alpha},
                          {"lambda", chosen.lambda},
                          {"objective", chosen.objective},
                          {"sigma2_hat", chosen.sigma2},
                          {"nnz_fixed", chosen.active.size()},
                          {"nnz_random", chosen.active.random_count()},
                          {"validation_loss", tuned.loss}};
    out << "chosen alpha=" << chosen.alpha << " lambda=" << chosen.lambda << " nnz_fixed=" << chosen.active.size()
        << " nnz_random=" << chosen.active.random_count() << '\n';
  }
  manifest["outputs"] = outputs;
  write_json(dir / "manifest.json", manifest);
  out << "fits=" << path.size() << " out=" << o.out << '\n';
  return kExitOk;
}

int cmd_simulate(const SimulateOptions& o, std::ostream& out) {
  SimConfig cfg;
  cfg.n_total = o.n;
  cfg.p = o.p;
  cfg.s_fixed = o.s_fixed;
  cfg.s_random = o.s_random;
  cfg.rho = o.rho;
  cfg.family = parse_family(o.family);
  cfg.seed = o.seed;
  cfg.validate();
  const fs::path dir = prepare_dir(o.out);

  const SyntheticStudy study = generate_study(cfg);
  write_csv((dir / "train.csv").string(), study.train);
  write_csv((dir / "validation.csv").string(), study.validation);
  write_truth((dir / "truth.csv").string(), study.truth, default_predictor_names(cfg.p));

  json manifest = manifest_base("simulate");
  manifest["config"] = {{"n_total", cfg.n_total}, {"p", cfg.p},         {"s_fixed", cfg.s_fixed},
                        {"s_random", cfg.s_random}, {"rho", cfg.rho}, {"family", o.family}};
  manifest["seed"] = o.seed;
  manifest["sigma2"] = study.truth.sigma2;
  manifest["clusters"] = study.train.m();
  manifest["outputs"] = {"train.csv", "validation.csv", "truth.csv"};
  write_json(dir / "manifest.json", manifest);
  out << "wrote train.csv validation.csv truth.csv to " << o.out << '\n';
  return kExitOk;
}

GroundTruth read_truth(const std::string& path, std::vector<std::string>& names) {
  const CsvTable table = read_csv_table(path);
  const std::size_t name_col = table.column("predictor");
  const std::size_t b = table.column("beta0");
  const std::size_t g = table.column("gamma0");
  GroundTruth truth;
  const auto p = static_cast<Index>(table.rows.size());
  truth.beta0 = Eigen::VectorXd::Zero(p);
  truth.gamma0 = Eigen::VectorXd::Zero(p);
  for (Index k = 0; k < p; ++k) {
    const auto& row = table.rows[static_cast<std::size_t>(k)];
    const std::size_t line = table.line_numbers[static_cast<std::size_t>(k)];
    names.push_back(row[name_col]);
    truth.beta0[k] = parse_number(row[b], line, "beta0");
    truth.gamma0[k] = parse_number(row[g], line, "gamma0");
  }
  return truth;
}

int cmd_evaluate(const EvaluateOptions& o, std::ostream& out) {
  if (!o.coefficients.empty() || !o.truth.empty()) {
    if (o.coefficients.empty() || o.truth.empty()) {
      raise(ErrorKind::InvalidConfig, "--coefficients and --truth must be given together");
    }
    std::vector<std::string> truth_names;
    const GroundTruth truth = read_truth(o.truth, truth_names);
    const NamedCoefficients fitted = read_coefficients(o.coefficients);
    if (fitted.names != truth_names) raise(ErrorKind::InvalidConfig, "predictor names of the two files differ");
    const SelectionScores s = selection_scores(truth, fitted.coef);
    std::string table = "sparsity,f1_effect_type,f1_nonzero\n" + format_double(s.sparsity) + ',' +
                        format_double(s.f1_effect_type) + ',' + format_double(s.f1_nonzero) + '\n';
    out << table;
    if (!o.out.empty()) {
      std::ofstream file(o.out);
      file << table;
      if (!file) raise(ErrorKind::Io, "failed writing '" + o.out + "'");
    }
    return kExitOk;
  }

  ExperimentSpec spec;
  spec.replicates = o.replicates;
  spec.seed = o.seed;
  spec.path = make_path_config(o.path);
  spec.threads = o.path.threads;
  spec.path.threads = 1;
  const Family family = parse_family(o.family);
  for (Index n : o.n) {
    for (Index p : o.p) {
      for (double rho : o.rho) {
        for (const auto& m : o.methods) {
          spec.cells.push_back({n, p, rho, family, parse_method(m), o.s_fixed, o.s_random});
        }
      }
    }
  }
  const ExperimentResult result = run_experiment(spec);
  if (!o.out.empty()) write_results_table(o.out, result);
  out << "n_total,p,rho,method,metric,mean,se,n\n";
  for (const auto& cell : result.cells) {
    for (const auto& m : cell.metrics) {
      out << cell.cell.n_total << ',' << cell.cell.p << ',' << cell.cell.rho << ',' << to_string(cell.cell.method)
          << ',' << m.metric << ',' << m.mean << ',' << m.se << ',' << m.n << '\n';
    }
  }
  return kExitOk;
}

int cmd_bench(const BenchOptions& o, std::ostream& out) {
  if (o.repeats < 1) raise(ErrorKind::InvalidConfig, "--repeats must be positive");
  std::ofstream file;
  if (!o.out.empty()) {
    file.open(o.out);
    if (!file) raise(ErrorKind::Io, "cannot write '" + o.out + "'");
  }
  const std::string header = "n_total,p,method,repeats,seconds_mean,seconds_se,fits_mean,ratio_to_previous_p\n";
  out << header;
  if (file) file << header;

  for (const auto& method_name : o.methods) {
    const Method method = parse_method(method_name);
    for (Index n : o.n) {
      double previous = 0.0;
      for (Index p : o.p) {
        std::vector<double> seconds;
        double fits = 0.0;
        for (int r = 0; r < o.repeats; ++r) {
          SimConfig sim;
          sim.n_total = n;
          sim.p = p;
          sim.seed = replicate_seed(o.seed, r);
          const Dataset data = standardize(generate_synthetic(sim).data);
          PathConfig cfg;
          cfg.alphas = {o.alpha};
          cfg.n_lambda = o.n_lambda;
          cfg.local_search = method == Method::CdLs;
          const auto start = std::chrono::steady_clock::now();
          const PathResult path = fit_path(data, cfg);
          seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
          fits += static_cast<double>(path.size());
        }
        double mean = 0.0;
        for (double s : seconds) mean += s;
        mean /= static_cast<double>(seconds.size());
        double se = 0.0;
        if (seconds.size() > 1) {
          for (double s : seconds) se += (s - mean) * (s - mean);
          se = std::sqrt(se / static_cast<double>(seconds.size() - 1)) / std::sqrt(static_cast<double>(seconds.size()));
        }
        const std::string ratio = previous > 0.0 ? format_double(mean / previous) : "";
        const std::string row = std::to_string(n) + ',' + std::to_string(p) + ',' + std::string(to_string(method)) +
                                ',' + std::to_string(o.repeats) + ',' + format_double(mean) + ',' +
                                format_double(se) + ',' + format_double(fits / o.repeats) + ',' + ratio + '\n';
        out << row;
        if (file) file << row;
        previous = mean;
      }
    }
  }
  if (file && !file.flush()) raise(ErrorKind::Io, "failed writing '" + o.out + "'");
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse fixed and random effect selection for clustered data", "glmmsel"};
  app.require_subcommand(1);
  app.set_version_flag("--version", GLMMSEL_VERSION);

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a regularization path and tune it on validation data");
  add_data_options(fit_cmd, fit.data);
  add_path_options(fit_cmd, fit.path);
  fit_cmd->add_option("--validation", fit.validation, "Validation CSV with the training schema");
  fit_cmd->add_option("--out", fit.out, "Output directory")->required();
  fit_cmd->add_option("--raw-scale", fit.raw_scale,
                      "Write coefficients on the original predictor scale (false: standardized)");

  FitOptions path;
  auto* path_cmd = app.add_subcommand("path", "Fit a regularization path without tuning");
  add_data_options(path_cmd, path.data);
  add_path_options(path_cmd, path.path);
  path_cmd->add_option("--out", path.out, "Output directory")->required();
  path_cmd->add_option("--raw-scale", path.raw_scale,
                       "Write coefficients on the original predictor scale (false: standardized)");

  SimulateOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Generate synthetic training and validation data");
  sim_cmd->set_config("--config", "", "key = value file with any of the options below");
  sim_cmd->add_option("--n", sim.n, "Total observations");
  sim_cmd->add_option("--p", sim.p, "Predictors");
  sim_cmd->add_option("--s-fixed", sim.s_fixed, "Nonzero fixed effects");
  sim_cmd->add_option("--s-random", sim.s_random, "Nonzero random effects");
  sim_cmd->add_option("--rho", sim.rho, "AR(1) predictor correlation");
  sim_cmd->add_option("--family", sim.family, "Response family")->check(CLI::IsMember(kFamilies));
  sim_cmd->add_option("--seed", sim.seed, "Random seed");
  sim_cmd->add_option("--out", sim.out, "Output directory")->required();

  EvaluateOptions ev;
  auto* ev_cmd = app.add_subcommand("evaluate", "Score a coefficient file, or run a simulation experiment");
  ev_cmd->add_option("--coefficients", ev.coefficients, "Coefficient file written by fit");
  ev_cmd->add_option("--truth", ev.truth, "Truth file written by simulate");
  ev_cmd->add_option("--n", ev.n, "Total observations (list)")->delimiter(',');
  ev_cmd->add_option("--p", ev.p, "Predictors (list)")->delimiter(',');
  ev_cmd->add_option("--rho", ev.rho, "Predictor correlation (list)")->delimiter(',');
  ev_cmd->add_option("--family", ev.family, "Response family")->check(CLI::IsMember(kFamilies));
  ev_cmd->add_option("--methods", ev.methods, "cd and/or cd_ls")->delimiter(',');
  ev_cmd->add_option("--s-fixed", ev.s_fixed, "Nonzero fixed effects");
  ev_cmd->add_option("--s-random", ev.s_random, "Nonzero random effects");
  ev_cmd->add_option("--replicates", ev.replicates, "Replicates per cell");
  ev_cmd->add_option("--seed", ev.seed, "Base seed");
  add_path_options(ev_cmd, ev.path);
  ev_cmd->add_option("--out", ev.out, "Output CSV");

  BenchOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "Time full path fits over a grid of sizes");
  bench_cmd->add_option("--n", bench.n, "Total observations (list)")->delimiter(',');
  bench_cmd->add_option("--p", bench.p, "Predictors (list)")->delimiter(',');
  bench_cmd->add_option("--methods", bench.methods, "cd and/or cd_ls")->delimiter(',');
  bench_cmd->add_option("--repeats", bench.repeats, "Datasets per grid point");
  bench_cmd->add_option("--alpha", bench.alpha, "Alpha of the timed path");
  bench_cmd->add_option("--n-lambda", bench.n_lambda, "Maximum fits per path");
  bench_cmd->add_option("--seed", bench.seed, "Base seed");
  bench_cmd->add_option("--out", bench.out, "Output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: Usage: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*fit_cmd) return cmd_path(fit, true, out, err);
    if (*path_cmd) return cmd_path(path, false, out, err);
    if (*sim_cmd) return cmd_simulate(sim, out);
    if (*ev_cmd) return cmd_evaluate(ev, out);
    if (*bench_cmd) return cmd_bench(bench, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitModel;
  } catch (const std::exception& e) {
    err << "error: Internal: " << e.what() << '\n';
    return kExitModel;
  }
  return kExitUsage;
}

}  // namespace glmmsel::cli

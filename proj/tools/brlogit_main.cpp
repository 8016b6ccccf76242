// Command-line driver: fit a model to CSV data, probe a dataset for
// separation, run a Monte Carlo scenario, or tabulate a prior density grid.
//
// Exit codes: 0 on success, 1 for usage or input errors, 2 for statistical
// failures (separation, non-convergence).

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "brlogit/brlogit.hpp"

namespace {

struct DataArgs {
  std::string path;
  std::string response;
  std::string trials;
  std::vector<std::string> covariates;
  bool no_intercept = false;
};

void add_data_options(CLI::App* cmd, DataArgs& args) {
  cmd->add_option("--data", args.path, "CSV file with a header row")->required();
  cmd->add_option("--response", args.response, "name of the response (success count) column")
      ->required();
  cmd->add_option("--trials", args.trials,
                  "name of the trials column (default: one trial per row)");
  cmd->add_option("--covariates", args.covariates,
                  "covariate column names (default: all remaining columns)")
      ->delimiter(',');
  cmd->add_flag("--no-intercept", args.no_intercept, "do not prepend an intercept column");
}

brlogit::BinomialDataset load_dataset(const DataArgs& args) {
  std::ifstream in(args.path);
  if (!in) throw std::invalid_argument("cannot open data file '" + args.path + "'");
  const brlogit::CsvTable table = brlogit::read_csv(in);
  brlogit::CsvSchema schema;
  schema.response = args.response;
  if (!args.trials.empty()) schema.trials = args.trials;
  schema.covariates = args.covariates;
  schema.add_intercept = !args.no_intercept;
  return brlogit::dataset_from_csv(table, schema);
}

std::ostream& open_sink(const std::string& path, std::ofstream& file) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw std::invalid_argument("cannot open output file '" + path + "'");
  return file;
}

std::string describe_direction(const brlogit::SeparationDiagnosis& diag,
                               const std::vector<std::string>& names) {
  if (!diag.direction) return "";
  std::string out;
  for (Eigen::Index r = 0; r < diag.direction->size(); ++r) {
    if (std::abs((*diag.direction)[r]) < 0.5) continue;
    if (!out.empty()) out += ", ";
    out += names.empty() ? "#" + std::to_string(r) : names[static_cast<size_t>(r)];
  }
  return out;
}

void print_fit_table(std::ostream& os, const brlogit::FitResult& r,
                     const std::vector<std::string>& names, double level) {
  const brlogit::Matrix ci = brlogit::wald_intervals(r, level);
  size_t width = 11;
  for (const std::string& n : names) width = std::max(width, n.size());
  char buf[256];
  os << "method: " << brlogit::method_name(r.method) << '\n';
  std::snprintf(buf, sizeof buf, "converged: %s (%d iterations, max |score| %.3g)\n",
                r.converged ? "yes" : "NO", r.iterations, r.final_grad_norm);
  os << buf;
  std::snprintf(buf, sizeof buf, "%-*s %12s %12s %12s %12s\n", static_cast<int>(width),
                "coefficient", "estimate", "std.error", "ci.lower", "ci.upper");
  os << buf;
  for (Eigen::Index k = 0; k < r.beta.size(); ++k) {
    const std::string name = names.empty() ? "#" + std::to_string(k) : names[static_cast<size_t>(k)];
    std::snprintf(buf, sizeof buf, "%-*s %12.3f %12.3f %12.3f %12.3f\n", static_cast<int>(width),
                  name.c_str(), r.beta[k], r.std_errors[k], ci(k, 0), ci(k, 1));
    os << buf;
  }
  if (r.separation && r.separation->kind != brlogit::SeparationKind::None) {
    os << "warning: " << brlogit::separation_kind_name(r.separation->kind)
       << " separation detected";
    const std::string dir = describe_direction(*r.separation, names);
    if (!dir.empty()) os << " (direction loads on: " << dir << ")";
    os << '\n';
  }
}

int run_fit(const DataArgs& data_args, const std::string& method_name, double level,
            const brlogit::FitConfig& cfg, bool as_json, const std::string& out_path) {
  const brlogit::BinomialDataset d = load_dataset(data_args);
  const brlogit::Method method = brlogit::method_from_name(method_name);
  const brlogit::FitResult r = brlogit::fit(method, d, cfg);
  std::ofstream file;
  std::ostream& os = open_sink(out_path, file);
  if (as_json)
    os << brlogit::fit_to_json(r, d.column_names, level).dump(2) << '\n';
  else
    print_fit_table(os, r, d.column_names, level);
  return r.converged ? 0 : 2;
}

int run_detect(const DataArgs& data_args, bool as_json, const std::string& out_path) {
  const brlogit::BinomialDataset d = load_dataset(data_args);
  const brlogit::SeparationDiagnosis diag = brlogit::detect_separation(d);
  std::ofstream file;
  std::ostream& os = open_sink(out_path, file);
  if (as_json) {
    os << brlogit::diagnosis_to_json(diag, d.column_names).dump(2) << '\n';
  } else {
    os << "separation: " << brlogit::separation_kind_name(diag.kind) << '\n';
    if (diag.direction) {
      os << "direction (unit max-norm):\n";
      char buf[256];
      for (Eigen::Index k = 0; k < diag.direction->size(); ++k) {
        const std::string name =
            d.column_names.empty() ? "#" + std::to_string(k) : d.column_names[static_cast<size_t>(k)];
        std::snprintf(buf, sizeof buf, "  %-16s %10.3f\n", name.c_str(), (*diag.direction)[k]);
        os << buf;
      }
    }
  }
  return diag.kind == brlogit::SeparationKind::None ? 0 : 2;
}

int run_simulate(const std::string& config_path, const std::string& out_dir, bool quiet) {
  std::ifstream in(config_path);
  if (!in) throw std::invalid_argument("cannot open config file '" + config_path + "'");
  brlogit::ScenarioConfig cfg = brlogit::parse_scenario_config(in);
  if (cfg.design == brlogit::DesignKind::FixedMatrix) {
    // Resolve the design CSV relative to the config file.
    std::filesystem::path p(cfg.fixed_design_path);
    if (p.is_relative()) p = std::filesystem::path(config_path).parent_path() / p;
    std::ifstream din(p);
    if (!din)
      throw std::invalid_argument("cannot open fixed design CSV '" + p.string() + "'");
    const brlogit::CsvTable t = brlogit::read_csv(din);
    cfg.fixed_design = t.values;
    brlogit::validate(cfg);
  }
  const brlogit::ScenarioReport rep = brlogit::run_scenario(cfg);

  std::filesystem::create_directories(out_dir);
  const auto csv_path = std::filesystem::path(out_dir) / "report.csv";
  const auto json_path = std::filesystem::path(out_dir) / "summary.json";
  {
    std::ofstream csv(csv_path);
    if (!csv) throw std::invalid_argument("cannot write '" + csv_path.string() + "'");
    brlogit::write_report_csv(rep, csv);
  }
  {
    std::ofstream js(json_path);
    if (!js) throw std::invalid_argument("cannot write '" + json_path.string() + "'");
    js << brlogit::report_to_json(rep).dump(2) << '\n';
  }
  if (!quiet) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%d replicates, %d with a separated ML fit\n", rep.n_reps,
                  rep.separation_reps);
    std::cout << buf;
    std::snprintf(buf, sizeof buf, "%-20s %6s %9s %10s %10s\n", "method", "reps", "failures",
                  "mean ms", "median ms");
    std::cout << buf;
    for (const brlogit::MethodSummary& ms : rep.methods) {
      std::snprintf(buf, sizeof buf, "%-20s %6d %9d %10.3f %10.3f\n",
                    brlogit::method_name(ms.method), ms.used_reps, ms.failures, ms.mean_ms,
                    ms.median_ms);
      std::cout << buf;
    }
    std::cout << "wrote " << csv_path.string() << " and " << json_path.string() << '\n';
  }
  return 0;
}

int run_priors_grid(const DataArgs& data_args, const std::string& prior_name, double range,
                    int resolution, double tau, const std::vector<double>& beta0,
                    const std::vector<double>& scales, const std::string& out_path) {
  const brlogit::BinomialDataset d = load_dataset(data_args);
  brlogit::PriorSpec spec;
  if (prior_name == "dy") {
    spec = brlogit::PriorSpec::make_dy();
    if (tau > 0.0 || !beta0.empty()) {
      brlogit::DYPrior prior = brlogit::default_dy_prior(d);
      if (tau > 0.0) prior.tau = tau;
      if (!beta0.empty()) {
        if (static_cast<Eigen::Index>(beta0.size()) != d.n_coef())
          throw std::invalid_argument("--beta0 must list one value per coefficient");
        prior.beta0 = Eigen::Map<const brlogit::Vector>(beta0.data(),
                                                        static_cast<Eigen::Index>(beta0.size()));
      }
      spec = brlogit::PriorSpec::make_dy(std::move(prior));
    }
  } else if (prior_name == "jeffreys") {
    spec = brlogit::PriorSpec::make_jeffreys();
  } else if (prior_name == "cauchy") {
    spec = brlogit::PriorSpec::make_cauchy();
    if (!scales.empty()) {
      if (static_cast<Eigen::Index>(scales.size()) != d.n_coef())
        throw std::invalid_argument("--scales must list one value per coefficient");
      spec = brlogit::PriorSpec::make_cauchy(Eigen::Map<const brlogit::Vector>(
          scales.data(), static_cast<Eigen::Index>(scales.size())));
    }
  } else {
    throw std::invalid_argument("unknown prior '" + prior_name +
                                "' (expected dy, jeffreys or cauchy)");
  }
  const brlogit::PriorGrid grid = brlogit::prior_density_grid(d, spec, -range, range, resolution);
  std::ofstream file;
  std::ostream& os = open_sink(out_path, file);
  brlogit::write_grid_csv(grid, os);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bias-reduced logistic regression toolkit"};
  app.require_subcommand(1);

  DataArgs fit_data;
  std::string fit_method = "dy";
  double fit_level = 0.95;
  brlogit::FitConfig fit_cfg;
  bool fit_json = false;
  std::string fit_out;
  CLI::App* fit_cmd = app.add_subcommand("fit", "fit a logistic regression model");
  add_data_options(fit_cmd, fit_data);
  fit_cmd->add_option("--method", fit_method,
                      "estimator: mle, dy, firth, clogg or cordeiro-mccullagh");
  fit_cmd->add_option("--level", fit_level, "Wald interval coverage level")
      ->check(CLI::Range(1e-6, 1.0 - 1e-6));
  fit_cmd->add_option("--max-iter", fit_cfg.max_iter, "iteration cap");
  fit_cmd->add_option("--tol", fit_cfg.grad_tol, "gradient max-norm tolerance");
  fit_cmd->add_flag("--json", fit_json, "emit JSON instead of a table");
  fit_cmd->add_option("--out", fit_out, "write output to this file instead of stdout");

  DataArgs detect_data;
  bool detect_json = false;
  std::string detect_out;
  CLI::App* detect_cmd =
      app.add_subcommand("detect", "check a dataset for complete or quasi-complete separation");
  add_data_options(detect_cmd, detect_data);
  detect_cmd->add_flag("--json", detect_json, "emit JSON instead of text");
  detect_cmd->add_option("--out", detect_out, "write output to this file instead of stdout");

  std::string sim_config, sim_out_dir;
  bool sim_quiet = false;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "run a Monte Carlo scenario");
  sim_cmd->add_option("--config", sim_config, "scenario configuration file")->required();
  sim_cmd->add_option("--out-dir", sim_out_dir, "directory for report.csv and summary.json")
      ->required();
  sim_cmd->add_flag("--quiet", sim_quiet, "suppress the console summary");

  DataArgs grid_data;
  std::string grid_prior = "dy";
  double grid_range = 4.0;
  int grid_resolution = 41;
  double grid_tau = 0.0;
  std::vector<double> grid_beta0, grid_scales;
  std::string grid_out;
  CLI::App* grid_cmd = app.add_subcommand(
      "priors-grid", "tabulate a prior log-density over a grid (two-coefficient designs)");
  add_data_options(grid_cmd, grid_data);
  grid_cmd->add_option("--prior", grid_prior, "prior family: dy, jeffreys or cauchy");
  grid_cmd->add_option("--range", grid_range, "grid covers [-range, range] on both axes")
      ->check(CLI::PositiveNumber);
  grid_cmd->add_option("--resolution", grid_resolution, "grid points per axis")
      ->check(CLI::Range(2, 2000));
  grid_cmd->add_option("--tau", grid_tau, "pseudo-trial weight for the dy prior");
  grid_cmd->add_option("--beta0", grid_beta0, "centering for the dy prior")->delimiter(',');
  grid_cmd->add_option("--scales", grid_scales, "per-coefficient cauchy scales")->delimiter(',');
  grid_cmd->add_option("--out", grid_out, "write the grid CSV to this file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 1;
  }

  try {
    if (*fit_cmd) return run_fit(fit_data, fit_method, fit_level, fit_cfg, fit_json, fit_out);
    if (*detect_cmd) return run_detect(detect_data, detect_json, detect_out);
    if (*sim_cmd) return run_simulate(sim_config, sim_out_dir, sim_quiet);
    if (*grid_cmd)
      return run_priors_grid(grid_data, grid_prior, grid_range, grid_resolution, grid_tau,
                             grid_beta0, grid_scales, grid_out);
  } catch (const brlogit::SeparationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

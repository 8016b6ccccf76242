#pragma once

// Monte Carlo harness: scenario configuration, reproducible data generation,
// per-method bias/RMSE summaries and timings.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "brlogit/dataset.hpp"
#include "brlogit/rng.hpp"
#include "brlogit/solvers.hpp"

namespace brlogit {

enum class DesignKind { GaussianScaled, CorrelatedGaussian, FixedMatrix };

struct ScenarioConfig {
  Index n = 0;
  Index p = 0;
  int n_reps = 0;
  std::uint64_t seed = 0;
  Vector true_beta;
  DesignKind design = DesignKind::GaussianScaled;
  double rho = 0.0;                    // CorrelatedGaussian only
  std::optional<Matrix> fixed_design;  // FixedMatrix only
  std::string fixed_design_path;       // set by the config parser, resolved by the caller
  Vector trials;                       // empty means one trial per observation
  std::vector<Method> methods;
};

// Five equal blocks at -3, -3/2, 0, 3/2, 3; p must be divisible by 5.
inline Vector make_highdim_beta(Index p) {
  if (p <= 0 || p % 5 != 0)
    throw std::invalid_argument("make_highdim_beta: p must be a positive multiple of 5");
  const double values[5] = {-3.0, -1.5, 0.0, 1.5, 3.0};
  Vector beta(p);
  const Index block = p / 5;
  for (Index j = 0; j < p; ++j) beta[j] = values[j / block];
  return beta;
}

inline void validate(const ScenarioConfig& cfg) {
  if (cfg.n < 1) throw std::invalid_argument("scenario: n must be >= 1");
  if (cfg.p < 1) throw std::invalid_argument("scenario: p must be >= 1");
  if (cfg.n_reps < 1) throw std::invalid_argument("scenario: reps must be >= 1");
  if (cfg.true_beta.size() != cfg.p)
    throw std::invalid_argument("scenario: beta length must equal p");
  if (cfg.design == DesignKind::CorrelatedGaussian && !(cfg.rho >= 0.0 && cfg.rho < 1.0))
    throw std::invalid_argument("scenario: rho must lie in [0,1)");
  if (cfg.design == DesignKind::FixedMatrix) {
    if (!cfg.fixed_design)
      throw std::invalid_argument("scenario: design 'fixed' needs a design matrix");
    if (cfg.fixed_design->rows() != cfg.n || cfg.fixed_design->cols() != cfg.p)
      throw std::invalid_argument("scenario: fixed design must be n by p");
  }
  if (cfg.trials.size() != 0 && cfg.trials.size() != cfg.n)
    throw std::invalid_argument("scenario: trials must be empty or length n");
  for (Index i = 0; i < cfg.trials.size(); ++i)
    if (!(cfg.trials[i] >= 1.0) || cfg.trials[i] != std::floor(cfg.trials[i]))
      throw std::invalid_argument("scenario: trials must be positive integers");
  if (cfg.methods.empty()) throw std::invalid_argument("scenario: methods must be non-empty");
}

// Covariates use stream 0 and responses stream 1, each keyed by the replicate
// index, so a replicate is reproducible in isolation.
inline BinomialDataset simulate_dataset(const ScenarioConfig& cfg, int rep) {
  validate(cfg);
  if (rep < 0 || rep >= cfg.n_reps) throw std::invalid_argument("simulate_dataset: rep out of range");
  BinomialDataset d;
  const double root_n = std::sqrt(static_cast<double>(cfg.n));
  CounterRng xg(cfg.seed, 0, static_cast<std::uint64_t>(rep));
  switch (cfg.design) {
    case DesignKind::GaussianScaled:
      d.X.resize(cfg.n, cfg.p);
      for (Index i = 0; i < cfg.n; ++i)
        for (Index j = 0; j < cfg.p; ++j) d.X(i, j) = xg.normal() / root_n;
      break;
    case DesignKind::CorrelatedGaussian: {
      d.X.resize(cfg.n, cfg.p);
      const double a = std::sqrt(cfg.rho), b = std::sqrt(1.0 - cfg.rho);
      for (Index i = 0; i < cfg.n; ++i) {
        const double shared = xg.normal();
        for (Index j = 0; j < cfg.p; ++j) d.X(i, j) = (a * shared + b * xg.normal()) / root_n;
      }
      break;
    }
    case DesignKind::FixedMatrix:
      d.X = *cfg.fixed_design;
      break;
  }
  d.m = cfg.trials.size() ? cfg.trials : Vector::Ones(cfg.n);
  d.y.resize(cfg.n);
  CounterRng yg(cfg.seed, 1, static_cast<std::uint64_t>(rep));
  const Vector pi = predict_probs(d, cfg.true_beta);
  for (Index i = 0; i < cfg.n; ++i) {
    const auto mi = static_cast<long>(d.m[i]);
    long yi = 0;
    for (long t = 0; t < mi; ++t) yi += yg.bernoulli(pi[i]) ? 1 : 0;
    d.y[i] = static_cast<double>(yi);
  }
  return d;
}

struct CoefficientStats {
  double bias = 0.0;
  double rmse = 0.0;
};

struct BlockStats {
  double value = 0.0;  // the common true coefficient on this block
  Index start = 0;
  Index count = 0;
  double mean_abs_bias = 0.0;
  double mean_rmse = 0.0;
};

struct MethodSummary {
  Method method = Method::MLE;
  int used_reps = 0;  // replicates contributing to the coefficient stats
  int failures = 0;   // non-converged fits or thrown errors
  std::vector<CoefficientStats> coef;
  std::vector<BlockStats> blocks;
  double mean_ms = 0.0;
  double median_ms = 0.0;
};

struct ScenarioReport {
  Index n = 0, p = 0;
  int n_reps = 0;
  std::uint64_t seed = 0;
  Vector true_beta;
  int separation_reps = 0;  // replicates where the ML fit did not converge
  std::vector<MethodSummary> methods;
};

// Runs every requested method on every replicate.  Timing covers the fit call
// only, never data generation.  A replicate enters a method's coefficient
// statistics only if that fit converged; the ML estimator therefore skips
// separated replicates while the penalized fits typically use them all.
inline ScenarioReport run_scenario(const ScenarioConfig& cfg) {
  validate(cfg);
  const size_t nm = cfg.methods.size();
  ScenarioReport rep;
  rep.n = cfg.n;
  rep.p = cfg.p;
  rep.n_reps = cfg.n_reps;
  rep.seed = cfg.seed;
  rep.true_beta = cfg.true_beta;
  std::vector<Vector> sum(nm, Vector::Zero(cfg.p)), sumsq(nm, Vector::Zero(cfg.p));
  std::vector<int> used(nm, 0), failed(nm, 0);
  std::vector<std::vector<double>> times(nm);

  for (int r = 0; r < cfg.n_reps; ++r) {
    const BinomialDataset data = simulate_dataset(cfg, r);
    bool ml_failed = false;
    for (size_t k = 0; k < nm; ++k) {
      const auto t0 = std::chrono::steady_clock::now();
      std::optional<FitResult> fit_result;
      try {
        fit_result = fit(cfg.methods[k], data);
      } catch (const std::exception&) {
        fit_result.reset();
      }
      const auto t1 = std::chrono::steady_clock::now();
      times[k].push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
      if (fit_result && fit_result->converged) {
        ++used[k];
        sum[k] += fit_result->beta;
        sumsq[k] += (fit_result->beta - cfg.true_beta).cwiseAbs2();
      } else {
        ++failed[k];
        if (cfg.methods[k] == Method::MLE) ml_failed = true;
      }
    }
    if (ml_failed) ++rep.separation_reps;
  }

  for (size_t k = 0; k < nm; ++k) {
    MethodSummary ms;
    ms.method = cfg.methods[k];
    ms.used_reps = used[k];
    ms.failures = failed[k];
    ms.coef.resize(static_cast<size_t>(cfg.p));
    if (used[k] > 0) {
      const double cnt = static_cast<double>(used[k]);
      for (Index j = 0; j < cfg.p; ++j) {
        ms.coef[static_cast<size_t>(j)].bias = sum[k][j] / cnt - cfg.true_beta[j];
        ms.coef[static_cast<size_t>(j)].rmse = std::sqrt(sumsq[k][j] / cnt);
      }
    }
    // Contiguous runs of equal true coefficients form blocks.
    for (Index j = 0; j < cfg.p;) {
      Index e = j;
      while (e < cfg.p && cfg.true_beta[e] == cfg.true_beta[j]) ++e;
      BlockStats b;
      b.value = cfg.true_beta[j];
      b.start = j;
      b.count = e - j;
      for (Index t = j; t < e; ++t) {
        b.mean_abs_bias += std::abs(ms.coef[static_cast<size_t>(t)].bias);
        b.mean_rmse += ms.coef[static_cast<size_t>(t)].rmse;
      }
      b.mean_abs_bias /= static_cast<double>(b.count);
      b.mean_rmse /= static_cast<double>(b.count);
      ms.blocks.push_back(b);
      j = e;
    }
    std::vector<double> t = times[k];
    std::sort(t.begin(), t.end());
    double total = 0.0;
    for (double v : t) total += v;
    ms.mean_ms = t.empty() ? 0.0 : total / static_cast<double>(t.size());
    ms.median_ms = t.empty() ? 0.0
                   : t.size() % 2 ? t[t.size() / 2]
                                  : 0.5 * (t[t.size() / 2 - 1] + t[t.size() / 2]);
    rep.methods.push_back(std::move(ms));
  }
  return rep;
}

// Long-format per-coefficient table.  Contains no timings, so the bytes are
// identical across reruns of the same configuration.
inline void write_report_csv(const ScenarioReport& rep, std::ostream& os) {
  os << "method,coefficient,true_value,bias,rmse,reps\n";
  char buf[64];
  const auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const MethodSummary& ms : rep.methods)
    for (size_t j = 0; j < ms.coef.size(); ++j) {
      os << method_name(ms.method) << ',' << j + 1 << ',' << num(rep.true_beta[static_cast<Index>(j)])
         << ',' << num(ms.coef[j].bias) << ',' << num(ms.coef[j].rmse) << ',' << ms.used_reps
         << '\n';
    }
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double parse_number(const std::string& field, const std::string& text) {
  try {
    size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("scenario config: field '" + field + "': cannot parse number '" +
                                text + "'");
  }
}

}  // namespace detail

// Line-oriented "key = value" format with '#' comments.  Keys: n, p, reps,
// seed, beta (comma list or "highdim"), design (gaussian | correlated RHO |
// fixed PATH), trials (single count or comma list), methods (comma list).
inline ScenarioConfig parse_scenario_config(std::istream& is) {
  ScenarioConfig cfg;
  std::string beta_text, trials_text;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("scenario config: line " + std::to_string(lineno) +
                                  ": expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (value.empty())
      throw std::invalid_argument("scenario config: field '" + key + "': empty value");
    if (key == "n")
      cfg.n = static_cast<Index>(detail::parse_number(key, value));
    else if (key == "p")
      cfg.p = static_cast<Index>(detail::parse_number(key, value));
    else if (key == "reps")
      cfg.n_reps = static_cast<int>(detail::parse_number(key, value));
    else if (key == "seed")
      cfg.seed = static_cast<std::uint64_t>(detail::parse_number(key, value));
    else if (key == "beta")
      beta_text = value;
    else if (key == "trials")
      trials_text = value;
    else if (key == "design") {
      std::istringstream vs(value);
      std::string kind;
      vs >> kind;
      std::string arg = detail::trim(value.substr(kind.size()));
      if (kind == "gaussian") {
        cfg.design = DesignKind::GaussianScaled;
      } else if (kind == "correlated") {
        cfg.design = DesignKind::CorrelatedGaussian;
        if (arg.empty())
          throw std::invalid_argument("scenario config: field 'design': correlated needs rho");
        cfg.rho = detail::parse_number("design", arg);
      } else if (kind == "fixed") {
        cfg.design = DesignKind::FixedMatrix;
        if (arg.empty())
          throw std::invalid_argument("scenario config: field 'design': fixed needs a CSV path");
        cfg.fixed_design_path = arg;
      } else {
        throw std::invalid_argument("scenario config: field 'design': unknown kind '" + kind +
                                    "'");
      }
    } else if (key == "methods") {
      for (const std::string& name : detail::split_list(value)) {
        try {
          cfg.methods.push_back(method_from_name(name));
        } catch (const std::invalid_argument& e) {
          throw std::invalid_argument("scenario config: field 'methods': " + std::string(e.what()));
        }
      }
    } else {
      throw std::invalid_argument("scenario config: unknown field '" + key + "'");
    }
  }
  if (cfg.p < 1) throw std::invalid_argument("scenario config: field 'p' is required");
  if (cfg.n < 1) throw std::invalid_argument("scenario config: field 'n' is required");
  if (cfg.n_reps < 1) throw std::invalid_argument("scenario config: field 'reps' is required");
  if (beta_text.empty()) throw std::invalid_argument("scenario config: field 'beta' is required");
  if (cfg.methods.empty())
    throw std::invalid_argument("scenario config: field 'methods' is required");
  if (beta_text == "highdim") {
    cfg.true_beta = make_highdim_beta(cfg.p);
  } else {
    const auto parts = detail::split_list(beta_text);
    cfg.true_beta.resize(static_cast<Index>(parts.size()));
    for (size_t j = 0; j < parts.size(); ++j)
      cfg.true_beta[static_cast<Index>(j)] = detail::parse_number("beta", parts[j]);
  }
  if (!trials_text.empty()) {
    const auto parts = detail::split_list(trials_text);
    if (parts.size() == 1) {
      cfg.trials = Vector::Constant(cfg.n, detail::parse_number("trials", parts[0]));
    } else {
      cfg.trials.resize(static_cast<Index>(parts.size()));
      for (size_t j = 0; j < parts.size(); ++j)
        cfg.trials[static_cast<Index>(j)] = detail::parse_number("trials", parts[j]);
    }
  }
  if (cfg.design != DesignKind::FixedMatrix) validate(cfg);
  return cfg;
}

}  // namespace brlogit

#pragma once

// External formats: strict CSV input with a header row, the column-schema
// mapping onto datasets, and JSON serialization of fits, diagnoses and
// simulation reports.  JSON carries full double precision; non-finite values
// become nulls on the wire and come back as NaN.

#include <json.hpp>

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "brlogit/dataset.hpp"
#include "brlogit/simulation.hpp"
#include "brlogit/solvers.hpp"

namespace brlogit {

struct CsvTable {
  std::vector<std::string> columns;
  Matrix values;  // one row per data line

  Index column_index(const std::string& name) const {
    for (size_t j = 0; j < columns.size(); ++j)
      if (columns[j] == name) return static_cast<Index>(j);
    throw std::invalid_argument("csv: no column named '" + name + "'");
  }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_csv_number(const std::string& text, int lineno, size_t col) {
  const auto fail = [&](const char* why) {
    throw std::invalid_argument("csv: line " + std::to_string(lineno) + ", field " +
                                std::to_string(col + 1) + ": " + why + " ('" + text + "')");
  };
  if (text.empty()) fail("empty field");
  double v = 0.0;
  const char* b = text.data();
  const char* e = b + text.size();
  const auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc{} || res.ptr != e) fail("not a number");
  if (!std::isfinite(v)) fail("non-finite value");
  return v;
}

}  // namespace detail

// Strict numeric CSV: comma separated, mandatory header row, every data cell
// a finite number.  CRLF endings and blank trailing lines are tolerated.
inline CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  int lineno = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) {
      if (lineno == 1) throw std::invalid_argument("csv: missing header row");
      continue;
    }
    const auto fields = detail::split_csv_line(line);
    if (lineno == 1) {
      for (const std::string& name : fields) {
        if (name.empty()) throw std::invalid_argument("csv: header has an empty column name");
        t.columns.push_back(name);
      }
      continue;
    }
    if (fields.size() != t.columns.size())
      throw std::invalid_argument("csv: line " + std::to_string(lineno) + ": expected " +
                                  std::to_string(t.columns.size()) + " fields, got " +
                                  std::to_string(fields.size()));
    std::vector<double> row(fields.size());
    for (size_t j = 0; j < fields.size(); ++j)
      row[j] = detail::parse_csv_number(fields[j], lineno, j);
    rows.push_back(std::move(row));
  }
  if (t.columns.empty()) throw std::invalid_argument("csv: missing header row");
  if (rows.empty()) throw std::invalid_argument("csv: no data rows");
  t.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(t.columns.size()));
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j)
      t.values(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return t;
}

// Maps table columns onto a model dataset.  An empty covariate list means
// every column other than the response/trials, in file order.
struct CsvSchema {
  std::string response;
  std::optional<std::string> trials;
  std::vector<std::string> covariates;
  bool add_intercept = true;
};

inline BinomialDataset dataset_from_csv(const CsvTable& t, const CsvSchema& schema) {
  const Index yc = t.column_index(schema.response);
  Index mc = -1;
  if (schema.trials) mc = t.column_index(*schema.trials);
  std::vector<Index> use;
  if (schema.covariates.empty()) {
    for (size_t j = 0; j < t.columns.size(); ++j) {
      const Index jj = static_cast<Index>(j);
      if (jj != yc && jj != mc) use.push_back(jj);
    }
  } else {
    for (const std::string& name : schema.covariates) {
      const Index jj = t.column_index(name);
      if (jj == yc || jj == mc)
        throw std::invalid_argument("csv schema: column '" + name +
                                    "' is already used as response or trials");
      use.push_back(jj);
    }
  }
  if (use.empty() && !schema.add_intercept)
    throw std::invalid_argument("csv schema: no covariates and no intercept");

  const Index n = t.values.rows();
  const Index p = static_cast<Index>(use.size()) + (schema.add_intercept ? 1 : 0);
  BinomialDataset d;
  d.X.resize(n, p);
  Index col = 0;
  if (schema.add_intercept) {
    d.X.col(0).setOnes();
    d.column_names.push_back("(intercept)");
    col = 1;
  }
  for (const Index jj : use) {
    d.X.col(col++) = t.values.col(jj);
    d.column_names.push_back(t.columns[static_cast<size_t>(jj)]);
  }
  d.y = t.values.col(yc);
  if (mc >= 0)
    d.m = t.values.col(mc);
  else
    d.m = Vector::Ones(n);
  for (Index i = 0; i < n; ++i) {
    if (d.y[i] != std::floor(d.y[i]))
      throw std::invalid_argument("csv schema: response must be an integer count (row " +
                                  std::to_string(i + 1) + ")");
    if (mc >= 0 && d.m[i] != std::floor(d.m[i]))
      throw std::invalid_argument("csv schema: trials must be integer counts (row " +
                                  std::to_string(i + 1) + ")");
  }
  validate(d);
  return d;
}

namespace detail {

inline double json_number(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace detail

inline nlohmann::json diagnosis_to_json(const SeparationDiagnosis& diag,
                                        const std::vector<std::string>& names = {}) {
  nlohmann::json j;
  j["kind"] = separation_kind_name(diag.kind);
  if (diag.direction) {
    nlohmann::json dir = nlohmann::json::array();
    for (Index r = 0; r < diag.direction->size(); ++r) {
      nlohmann::json entry;
      entry["coefficient"] =
          names.empty() ? "#" + std::to_string(r) : names[static_cast<size_t>(r)];
      entry["value"] = (*diag.direction)[r];
      dir.push_back(std::move(entry));
    }
    j["direction"] = std::move(dir);
  }
  return j;
}

inline nlohmann::json fit_to_json(const FitResult& r, const std::vector<std::string>& names = {},
                                  double ci_level = 0.95) {
  if (!names.empty() && static_cast<Index>(names.size()) != r.beta.size())
    throw std::invalid_argument("fit_to_json: name count does not match coefficients");
  const Matrix ci = wald_intervals(r, ci_level);
  nlohmann::json j;
  j["method"] = method_name(r.method);
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["final_grad_norm"] = r.final_grad_norm;
  j["ci_level"] = ci_level;
  nlohmann::json coefs = nlohmann::json::array();
  for (Index r2 = 0; r2 < r.beta.size(); ++r2) {
    nlohmann::json c;
    c["name"] = names.empty() ? "#" + std::to_string(r2) : names[static_cast<size_t>(r2)];
    c["estimate"] = r.beta[r2];
    c["std_error"] = r.std_errors[r2];
    c["ci_lower"] = ci(r2, 0);
    c["ci_upper"] = ci(r2, 1);
    coefs.push_back(std::move(c));
  }
  j["coefficients"] = std::move(coefs);
  nlohmann::json vc = nlohmann::json::array();
  for (Index a = 0; a < r.vcov.rows(); ++a) {
    nlohmann::json row = nlohmann::json::array();
    for (Index b = 0; b < r.vcov.cols(); ++b) row.push_back(r.vcov(a, b));
    vc.push_back(std::move(row));
  }
  j["vcov"] = std::move(vc);
  if (r.separation) {
    j["separation"] = diagnosis_to_json(*r.separation, names);
  }
  return j;
}

// Rebuilds the numeric content of a fit from its JSON form.  Coefficient
// names travel in the JSON but not in the result type.
inline FitResult fit_from_json(const nlohmann::json& j) {
  FitResult r;
  r.method = method_from_name(j.at("method").get<std::string>());
  r.converged = j.at("converged").get<bool>();
  r.iterations = j.at("iterations").get<int>();
  r.final_grad_norm = detail::json_number(j.at("final_grad_norm"));
  const auto& coefs = j.at("coefficients");
  const Index p = static_cast<Index>(coefs.size());
  r.beta.resize(p);
  r.std_errors.resize(p);
  for (Index k = 0; k < p; ++k) {
    r.beta[k] = detail::json_number(coefs[static_cast<size_t>(k)].at("estimate"));
    r.std_errors[k] = detail::json_number(coefs[static_cast<size_t>(k)].at("std_error"));
  }
  const auto& vc = j.at("vcov");
  r.vcov.resize(static_cast<Index>(vc.size()), p);
  for (Index a = 0; a < r.vcov.rows(); ++a)
    for (Index b = 0; b < p; ++b)
      r.vcov(a, b) = detail::json_number(vc[static_cast<size_t>(a)][static_cast<size_t>(b)]);
  if (j.contains("separation")) {
    SeparationDiagnosis diag;
    const std::string kind = j["separation"].at("kind").get<std::string>();
    diag.kind = kind == "complete"         ? SeparationKind::Complete
                : kind == "quasi-complete" ? SeparationKind::QuasiComplete
                                           : SeparationKind::None;
    if (j["separation"].contains("direction")) {
      const auto& dir = j["separation"]["direction"];
      Vector v(static_cast<Index>(dir.size()));
      for (size_t k = 0; k < dir.size(); ++k)
        v[static_cast<Index>(k)] = detail::json_number(dir[k].at("value"));
      diag.direction = std::move(v);
    }
    r.separation = std::move(diag);
  }
  return r;
}

inline nlohmann::json report_to_json(const ScenarioReport& rep) {
  nlohmann::json j;
  j["n"] = rep.n;
  j["p"] = rep.p;
  j["reps"] = rep.n_reps;
  j["seed"] = rep.seed;
  j["separation_reps"] = rep.separation_reps;
  nlohmann::json methods = nlohmann::json::array();
  for (const MethodSummary& ms : rep.methods) {
    nlohmann::json m;
    m["method"] = method_name(ms.method);
    m["used_reps"] = ms.used_reps;
    m["failures"] = ms.failures;
    m["mean_ms"] = ms.mean_ms;
    m["median_ms"] = ms.median_ms;
    nlohmann::json blocks = nlohmann::json::array();
    for (const BlockStats& b : ms.blocks) {
      nlohmann::json bj;
      bj["value"] = b.value;
      bj["start"] = b.start;
      bj["count"] = b.count;
      bj["mean_abs_bias"] = b.mean_abs_bias;
      bj["mean_rmse"] = b.mean_rmse;
      blocks.push_back(std::move(bj));
    }
    m["blocks"] = std::move(blocks);
    methods.push_back(std::move(m));
  }
  j["methods"] = std::move(methods);
  return j;
}

// Grid CSV in long format: one row per (beta1, beta2) node.
inline void write_grid_csv(const PriorGrid& g, std::ostream& os) {
  os << "beta1,beta2,log_density\n";
  char buf[64];
  const auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (Index i = 0; i < g.axis1.size(); ++i)
    for (Index j = 0; j < g.axis2.size(); ++j)
      os << num(g.axis1[i]) << ',' << num(g.axis2[j]) << ',' << num(g.log_density(i, j)) << '\n';
}

}  // namespace brlogit

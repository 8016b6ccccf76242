#pragma once

// Grouped binomial data: row i of X carries y_i successes out of m_i trials.
// Successes and trials are stored as reals so that pseudo-count adjusted
// copies (which have fractional entries) flow through the same fitting code
// as raw data.

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace brlogit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

struct BinomialDataset {
  Matrix X;
  Vector y;
  Vector m;
  std::vector<std::string> column_names;  // empty, or one name per column of X

  Index n_obs() const { return X.rows(); }
  Index n_coef() const { return X.cols(); }
  double total_trials() const { return m.sum(); }
};

inline void validate(const BinomialDataset& d) {
  if (d.X.rows() == 0 || d.X.cols() == 0)
    throw std::invalid_argument("dataset: design matrix must be non-empty");
  if (d.y.size() != d.X.rows() || d.m.size() != d.X.rows())
    throw std::invalid_argument("dataset: X, y and m must agree on the number of rows");
  if (!d.column_names.empty() && static_cast<Index>(d.column_names.size()) != d.X.cols())
    throw std::invalid_argument("dataset: column_names must match the number of columns");
  if (!d.X.allFinite()) throw std::invalid_argument("dataset: design matrix has non-finite entries");
  for (Index i = 0; i < d.y.size(); ++i) {
    if (!std::isfinite(d.m[i]) || !(d.m[i] > 0.0))
      throw std::invalid_argument("dataset: trials must be positive (row " + std::to_string(i) + ")");
    if (!std::isfinite(d.y[i]) || d.y[i] < 0.0 || d.y[i] > d.m[i])
      throw std::invalid_argument("dataset: successes must lie in [0, trials] (row " +
                                  std::to_string(i) + ")");
  }
}

inline bool has_integral_counts(const BinomialDataset& d, double tol = 1e-9) {
  for (Index i = 0; i < d.y.size(); ++i) {
    if (std::abs(d.y[i] - std::round(d.y[i])) > tol) return false;
    if (std::abs(d.m[i] - std::round(d.m[i])) > tol) return false;
  }
  return true;
}

// Expand every row into m_i Bernoulli rows (y_i ones followed by zeros).
// Requires integral counts.
inline BinomialDataset disaggregate(const BinomialDataset& d) {
  validate(d);
  if (!has_integral_counts(d))
    throw std::invalid_argument("disaggregate: requires integer successes and trials");
  Index total = 0;
  for (Index i = 0; i < d.m.size(); ++i) total += static_cast<Index>(std::llround(d.m[i]));
  BinomialDataset out;
  out.X.resize(total, d.X.cols());
  out.y.resize(total);
  out.m = Vector::Ones(total);
  out.column_names = d.column_names;
  Index r = 0;
  for (Index i = 0; i < d.n_obs(); ++i) {
    const Index mi = static_cast<Index>(std::llround(d.m[i]));
    const Index yi = static_cast<Index>(std::llround(d.y[i]));
    for (Index t = 0; t < mi; ++t, ++r) {
      out.X.row(r) = d.X.row(i);
      out.y[r] = t < yi ? 1.0 : 0.0;
    }
  }
  return out;
}

// Merge rows with bitwise-identical covariates, summing successes and trials.
// Groups keep the order in which their covariate pattern first appears.
inline BinomialDataset aggregate(const BinomialDataset& d) {
  validate(d);
  std::map<std::vector<double>, Index> slot;
  std::vector<Index> first_row;
  std::vector<double> ys, ms;
  std::vector<double> key(d.X.cols());
  for (Index i = 0; i < d.n_obs(); ++i) {
    for (Index j = 0; j < d.X.cols(); ++j) key[static_cast<size_t>(j)] = d.X(i, j);
    auto [it, inserted] = slot.try_emplace(key, static_cast<Index>(first_row.size()));
    if (inserted) {
      first_row.push_back(i);
      ys.push_back(0.0);
      ms.push_back(0.0);
    }
    ys[static_cast<size_t>(it->second)] += d.y[i];
    ms[static_cast<size_t>(it->second)] += d.m[i];
  }
  const Index g = static_cast<Index>(first_row.size());
  BinomialDataset out;
  out.X.resize(g, d.X.cols());
  out.y.resize(g);
  out.m.resize(g);
  out.column_names = d.column_names;
  for (Index k = 0; k < g; ++k) {
    out.X.row(k) = d.X.row(first_row[static_cast<size_t>(k)]);
    out.y[k] = ys[static_cast<size_t>(k)];
    out.m[k] = ms[static_cast<size_t>(k)];
  }
  return out;
}

}  // namespace brlogit

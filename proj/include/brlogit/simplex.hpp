#pragma once

// Dense simplex solver for the small LPs behind separation detection.
// Handles max c'x subject to A x <= b, x >= 0 with b >= 0, so the slack basis
// is a valid starting point and no phase-1 is needed.  Bland's rule keeps the
// pivoting cycle-free.

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

#include "brlogit/dataset.hpp"

namespace brlogit {

struct LinearProgramResult {
  Vector x;
  double objective = 0.0;
  bool bounded = true;
};

inline LinearProgramResult simplex_maximize(const Vector& c, const Matrix& a, const Vector& b) {
  const Index m = a.rows(), n = a.cols();
  if (c.size() != n || b.size() != m)
    throw std::invalid_argument("simplex_maximize: inconsistent dimensions");
  if (b.minCoeff() < 0.0)
    throw std::invalid_argument("simplex_maximize: requires b >= 0");

  // Tableau rows 0..m-1 are constraints with slack columns n..n+m-1 and the
  // right-hand side in the last column; row m holds reduced costs.
  Matrix t = Matrix::Zero(m + 1, n + m + 1);
  t.topLeftCorner(m, n) = a;
  t.block(0, n, m, m) = Matrix::Identity(m, m);
  t.col(n + m).head(m) = b;
  t.row(m).head(n) = -c.transpose();

  std::vector<Index> basis(static_cast<size_t>(m));
  for (Index i = 0; i < m; ++i) basis[static_cast<size_t>(i)] = n + i;

  const double eps = 1e-9;
  while (true) {
    // Bland: entering variable is the lowest index with a negative reduced cost.
    Index enter = -1;
    for (Index j = 0; j < n + m; ++j)
      if (t(m, j) < -eps) {
        enter = j;
        break;
      }
    if (enter < 0) break;

    Index leave = -1;
    double best_ratio = 0.0;
    for (Index i = 0; i < m; ++i) {
      const double aij = t(i, enter);
      if (aij > eps) {
        const double ratio = t(i, n + m) / aij;
        if (leave < 0 || ratio < best_ratio - eps ||
            (ratio < best_ratio + eps && basis[static_cast<size_t>(i)] < basis[static_cast<size_t>(leave)]))
          leave = i, best_ratio = ratio;
      }
    }
    if (leave < 0) {
      LinearProgramResult r;
      r.bounded = false;
      return r;
    }

    t.row(leave) /= t(leave, enter);
    for (Index i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const double f = t(i, enter);
      if (f != 0.0) t.row(i) -= f * t.row(leave);
    }
    basis[static_cast<size_t>(leave)] = enter;
  }

  LinearProgramResult r;
  r.x = Vector::Zero(n);
  for (Index i = 0; i < m; ++i)
    if (basis[static_cast<size_t>(i)] < n) r.x[basis[static_cast<size_t>(i)]] = t(i, n + m);
  r.objective = t(m, n + m);
  r.bounded = true;
  return r;
}

}  // namespace brlogit

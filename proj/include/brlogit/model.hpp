#pragma once

// Core logistic-model quantities: likelihood, score, Fisher information,
// leverages.  Everything is parameterised by (dataset, beta); solvers layer
// iteration logic on top.

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <stdexcept>
#include <string>

#include "brlogit/dataset.hpp"
#include "brlogit/math.hpp"

namespace brlogit {

// Raised when X'WX (or X itself) is numerically rank deficient.
class RankDeficientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelState {
  Vector beta;
  Vector eta;  // X beta
  Vector pi;   // sigmoid(eta)
  Vector w;    // m_i pi_i (1 - pi_i)
};

inline Vector linear_predictor(const BinomialDataset& d, const Vector& beta) {
  if (beta.size() != d.n_coef())
    throw std::invalid_argument("beta length does not match the design matrix");
  return d.X * beta;
}

inline Vector predict_probs(const BinomialDataset& d, const Vector& beta) {
  return linear_predictor(d, beta).unaryExpr([](double z) { return sigmoid(z); });
}

inline ModelState evaluate_state(const BinomialDataset& d, const Vector& beta) {
  ModelState s;
  s.beta = beta;
  s.eta = linear_predictor(d, beta);
  s.pi = s.eta.unaryExpr([](double z) { return sigmoid(z); });
  s.w = d.m.array() * s.pi.array() * (1.0 - s.pi.array());
  return s;
}

// sum_i [ y_i eta_i - m_i log(1 + exp(eta_i)) ]
inline double log_likelihood(const BinomialDataset& d, const Vector& beta) {
  const Vector eta = linear_predictor(d, beta);
  double ll = 0.0;
  for (Index i = 0; i < eta.size(); ++i) ll += d.y[i] * eta[i] - d.m[i] * softplus(eta[i]);
  return ll;
}

// U(beta) = X' (y - m.*pi)
inline Vector score(const BinomialDataset& d, const Vector& beta) {
  const ModelState s = evaluate_state(d, beta);
  return d.X.transpose() * (d.y - d.m.cwiseProduct(s.pi));
}

inline Matrix fisher_information(const BinomialDataset& d, const Vector& beta) {
  const ModelState s = evaluate_state(d, beta);
  return d.X.transpose() * s.w.asDiagonal() * d.X;
}

namespace detail {

// Cholesky of an information matrix with a pivot-ratio rank check: a smallest
// pivot below sqrt(eps) times the largest is treated as rank deficiency.
inline Eigen::LLT<Matrix> factor_information(const Matrix& a) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success)
    throw RankDeficientError("information matrix is not positive definite");
  const Vector diag = llt.matrixLLT().diagonal();
  const double lo = diag.minCoeff(), hi = diag.maxCoeff();
  if (!(lo > 1.4901161193847656e-08 * hi))  // sqrt(double eps)
    throw RankDeficientError("information matrix is numerically rank deficient");
  return llt;
}

// Names the trailing columns of a rank-revealing QR when X is column-rank
// deficient; empty string when X has full column rank.
inline std::string describe_rank_deficiency(const BinomialDataset& d) {
  Eigen::ColPivHouseholderQR<Matrix> qr(d.X);
  qr.setThreshold(1e-10);
  const Index rank = qr.rank();
  if (rank >= d.n_coef()) return "";
  std::string msg = "design matrix has rank " + std::to_string(rank) + " < " +
                    std::to_string(d.n_coef()) + "; dependent column(s):";
  const auto perm = qr.colsPermutation().indices();
  for (Index k = rank; k < d.n_coef(); ++k) {
    const Index col = static_cast<Index>(perm[k]);
    msg += ' ';
    msg += d.column_names.empty() ? ("#" + std::to_string(col))
                                  : d.column_names[static_cast<size_t>(col)];
  }
  return msg;
}

// Leverage diagonal h_i = w_i x_i' (X'WX)^{-1} x_i from an existing factor,
// without forming the n-by-n hat matrix.
inline Vector leverages_from_factor(const Eigen::LLT<Matrix>& llt, const BinomialDataset& d,
                                    const Vector& w) {
  Matrix t = llt.matrixL().solve(d.X.transpose());  // p x n triangular solve
  return w.cwiseProduct(t.colwise().squaredNorm().transpose());
}

}  // namespace detail

// Diagonal of H = W^{1/2} X (X'WX)^{-1} X' W^{1/2}.
inline Vector leverages(const BinomialDataset& d, const Vector& beta) {
  const ModelState s = evaluate_state(d, beta);
  const Matrix a = d.X.transpose() * s.w.asDiagonal() * d.X;
  Eigen::LLT<Matrix> llt;
  try {
    llt = detail::factor_information(a);
  } catch (const RankDeficientError&) {
    const std::string why = detail::describe_rank_deficiency(d);
    throw RankDeficientError(why.empty() ? "leverages: information matrix is rank deficient"
                                         : "leverages: " + why);
  }
  return detail::leverages_from_factor(llt, d, s.w);
}

}  // namespace brlogit

#pragma once

// Bias-reducing adjustments.  The conjugate-prior (pseudo-count) penalty adds
// tau fractional trials per observed trial, split according to the prior's
// centering; Firth's correction reweights by leverages; the Clogg and
// Cordeiro-McCullagh estimators use simpler global adjustments.

#include <optional>
#include <stdexcept>

#include "brlogit/dataset.hpp"
#include "brlogit/math.hpp"
#include "brlogit/model.hpp"

namespace brlogit {

// Conjugate prior parameters: centering beta0 and pseudo-trial weight tau.
// The default centers at the origin with tau = p / (total trials), which adds
// p pseudo-trials in total regardless of sample size.
struct DYPrior {
  Vector beta0;
  double tau = 0.0;
};

inline void validate(const BinomialDataset& d, const DYPrior& prior) {
  if (prior.beta0.size() != d.n_coef())
    throw std::invalid_argument("prior: beta0 length does not match the design matrix");
  if (!(prior.tau > 0.0)) throw std::invalid_argument("prior: tau must be positive");
}

inline DYPrior default_dy_prior(const BinomialDataset& d) {
  return {Vector::Zero(d.n_coef()), static_cast<double>(d.n_coef()) / d.total_trials()};
}

// kappa_i = m_i sigmoid(x_i' beta0): prior expected successes per row.
inline Vector prior_expected_counts(const BinomialDataset& d, const DYPrior& prior) {
  validate(d, prior);
  return d.m.cwiseProduct(predict_probs(d, prior.beta0));
}

// Replaces y with (tau kappa + y) / (tau + 1) and keeps the trials, so the
// penalized likelihood equals (1 + tau) times the ordinary likelihood of the
// adjusted data.
inline BinomialDataset pseudo_count_data(const BinomialDataset& d, const DYPrior& prior) {
  const Vector kappa = prior_expected_counts(d, prior);
  BinomialDataset out = d;
  out.y = (prior.tau * kappa + d.y) / (prior.tau + 1.0);
  return out;
}

inline BinomialDataset pseudo_count_data(const BinomialDataset& d) {
  return pseudo_count_data(d, default_dy_prior(d));
}

// l(beta) + tau [ sum_i kappa_i eta_i - sum_i m_i log(1 + exp(eta_i)) ]
inline double penalized_log_likelihood(const BinomialDataset& d, const Vector& beta,
                                       const DYPrior& prior) {
  const Vector kappa = prior_expected_counts(d, prior);
  const Vector eta = linear_predictor(d, beta);
  double pen = 0.0;
  for (Index i = 0; i < eta.size(); ++i) pen += kappa[i] * eta[i] - d.m[i] * softplus(eta[i]);
  return log_likelihood(d, beta) + prior.tau * pen;
}

inline double penalized_log_likelihood(const BinomialDataset& d, const Vector& beta) {
  return penalized_log_likelihood(d, beta, default_dy_prior(d));
}

// Gradient of the penalized likelihood: X' [ (y + tau kappa) - (1+tau) m.*pi ].
inline Vector penalized_score(const BinomialDataset& d, const Vector& beta, const DYPrior& prior) {
  const Vector kappa = prior_expected_counts(d, prior);
  const ModelState s = evaluate_state(d, beta);
  return d.X.transpose() *
         (d.y + prior.tau * kappa - (1.0 + prior.tau) * d.m.cwiseProduct(s.pi));
}

inline Vector penalized_score(const BinomialDataset& d, const Vector& beta) {
  return penalized_score(d, beta, default_dy_prior(d));
}

// Firth's modified score X' [ y + h/2 - (m + h).*pi ], with h the leverage
// diagonal at beta.
inline Vector firth_modified_score(const BinomialDataset& d, const Vector& beta) {
  const ModelState s = evaluate_state(d, beta);
  const Matrix a = d.X.transpose() * s.w.asDiagonal() * d.X;
  const Vector h = detail::leverages_from_factor(detail::factor_information(a), d, s.w);
  return d.X.transpose() * (d.y + 0.5 * h - (d.m + h).cwiseProduct(s.pi));
}

// Clogg et al. shrinkage data: y_i + p ybar, m_i + p/n with ybar the overall
// success rate.  Depends on how rows are grouped, unlike the other methods.
inline BinomialDataset clogg_adjust(const BinomialDataset& d) {
  validate(d);
  const double n = static_cast<double>(d.n_obs());
  const double p = static_cast<double>(d.n_coef());
  const double rate = d.y.sum() / d.total_trials();
  BinomialDataset out = d;
  out.y = d.y.array() + p * rate / n;
  out.m = d.m.array() + p / n;
  return out;
}

enum class PriorKind { DY, Jeffreys, Cauchy };

struct PriorSpec {
  PriorKind kind = PriorKind::DY;
  std::optional<DYPrior> dy;           // DY: defaults to default_dy_prior(data)
  std::optional<Vector> cauchy_scale;  // Cauchy: per-coefficient scales, default 2.5

  static PriorSpec make_dy() { return {PriorKind::DY, std::nullopt, std::nullopt}; }
  static PriorSpec make_dy(DYPrior prior) { return {PriorKind::DY, std::move(prior), std::nullopt}; }
  static PriorSpec make_jeffreys() { return {PriorKind::Jeffreys, std::nullopt, std::nullopt}; }
  static PriorSpec make_cauchy() { return {PriorKind::Cauchy, std::nullopt, std::nullopt}; }
  static PriorSpec make_cauchy(Vector scales) {
    return {PriorKind::Cauchy, std::nullopt, std::move(scales)};
  }
};

// Log density of the prior at beta, up to an additive constant.  The DY and
// Jeffreys priors depend on the design; the Cauchy prior is a product of
// independent per-coefficient densities.
inline double log_prior_density(const BinomialDataset& d, const PriorSpec& spec,
                                const Vector& beta) {
  if (beta.size() != d.n_coef())
    throw std::invalid_argument("log_prior_density: beta length does not match the design");
  switch (spec.kind) {
    case PriorKind::DY: {
      const DYPrior prior = spec.dy ? *spec.dy : default_dy_prior(d);
      const Vector kappa = prior_expected_counts(d, prior);
      const Vector eta = linear_predictor(d, beta);
      double v = 0.0;
      for (Index i = 0; i < eta.size(); ++i) v += kappa[i] * eta[i] - d.m[i] * softplus(eta[i]);
      return prior.tau * v;
    }
    case PriorKind::Jeffreys: {
      const Matrix a = fisher_information(d, beta);
      const auto llt = detail::factor_information(a);
      return Vector(llt.matrixLLT().diagonal()).array().log().sum();  // 0.5 log det
    }
    case PriorKind::Cauchy: {
      Vector scales = spec.cauchy_scale ? *spec.cauchy_scale
                                        : Vector::Constant(d.n_coef(), 2.5);
      if (scales.size() != d.n_coef())
        throw std::invalid_argument("log_prior_density: cauchy scales length mismatch");
      double v = 0.0;
      for (Index r = 0; r < beta.size(); ++r) v += log_cauchy_pdf(beta[r], scales[r]);
      return v;
    }
  }
  throw std::logic_error("log_prior_density: unknown prior kind");
}

// Log-density surface over a square grid of (beta_1, beta_2), shifted so the
// maximum is zero.  Only defined for two-coefficient designs.
struct PriorGrid {
  Vector axis1, axis2;
  Matrix log_density;  // (i, j) -> density at (axis1[i], axis2[j])
};

inline PriorGrid prior_density_grid(const BinomialDataset& d, const PriorSpec& spec, double lo,
                                    double hi, int resolution) {
  validate(d);
  if (d.n_coef() != 2)
    throw std::invalid_argument("prior_density_grid: requires exactly two coefficients");
  if (!(lo < hi)) throw std::invalid_argument("prior_density_grid: empty range");
  if (resolution < 2) throw std::invalid_argument("prior_density_grid: resolution must be >= 2");
  PriorGrid g;
  g.axis1 = Vector::LinSpaced(resolution, lo, hi);
  g.axis2 = Vector::LinSpaced(resolution, lo, hi);
  g.log_density.resize(resolution, resolution);
  Vector beta(2);
  for (int i = 0; i < resolution; ++i)
    for (int j = 0; j < resolution; ++j) {
      beta << g.axis1[i], g.axis2[j];
      g.log_density(i, j) = log_prior_density(d, spec, beta);
    }
  g.log_density.array() -= g.log_density.maxCoeff();
  return g;
}

}  // namespace brlogit

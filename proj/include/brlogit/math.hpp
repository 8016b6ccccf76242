#pragma once

// Scalar numerics shared across the library: overflow-safe logistic
// transforms plus the normal quantile/CDF used for Wald intervals and
// inverse-CDF sampling.

#include <cmath>
#include <stdexcept>

namespace brlogit {

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow for large positive z or cancellation for
// large negative z.
inline double softplus(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

inline double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("logit: argument must lie in (0,1)");
  return std::log(p / (1.0 - p));
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }

inline double normal_pdf(double x) { return 0.3989422804014326779 * std::exp(-0.5 * x * x); }

// Inverse normal CDF.  Abramowitz-Stegun 26.2.22 seeds a few Newton steps on
// Phi(x) - p; accurate to full double precision over (0,1).
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: argument must lie in (0,1)");
  if (p == 0.5) return 0.0;
  if (p > 0.5) return -normal_quantile(1.0 - p);
  const double t = std::sqrt(-2.0 * std::log(p));
  double x = -(t - (2.30753 + 0.27061 * t) / (1.0 + t * (0.99229 + 0.04481 * t)));
  for (int k = 0; k < 3; ++k) {
    const double d = normal_pdf(x);
    if (d <= 0.0) break;  // deep in the tail the seed is already as good as it gets
    x -= (normal_cdf(x) - p) / d;
  }
  return x;
}

inline double log_cauchy_pdf(double x, double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("log_cauchy_pdf: scale must be positive");
  const double z = x / scale;
  return -1.1447298858494001741 - std::log(scale) - std::log1p(z * z);
}

}  // namespace brlogit

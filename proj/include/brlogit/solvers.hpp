#pragma once

// Fitting routines.  Everything reduces to Fisher scoring with step halving:
// maximum likelihood on the raw data, the pseudo-count estimator as maximum
// likelihood on adjusted data, Firth via its modified score, Clogg via a
// global count adjustment, and Cordeiro-McCullagh as a multiplicative
// correction of the ML estimate.  Separation detection runs a small LP over
// the disaggregated observations.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "brlogit/dataset.hpp"
#include "brlogit/math.hpp"
#include "brlogit/model.hpp"
#include "brlogit/penalties.hpp"
#include "brlogit/simplex.hpp"

namespace brlogit {

enum class Method { MLE, DY, Firth, Clogg, CordeiroMcCullagh };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::MLE: return "mle";
    case Method::DY: return "dy";
    case Method::Firth: return "firth";
    case Method::Clogg: return "clogg";
    case Method::CordeiroMcCullagh: return "cordeiro-mccullagh";
  }
  return "?";
}

inline Method method_from_name(const std::string& name) {
  if (name == "mle") return Method::MLE;
  if (name == "dy") return Method::DY;
  if (name == "firth") return Method::Firth;
  if (name == "clogg") return Method::Clogg;
  if (name == "cordeiro-mccullagh" || name == "cm") return Method::CordeiroMcCullagh;
  throw std::invalid_argument("unknown method '" + name +
                              "' (expected mle, dy, firth, clogg or cordeiro-mccullagh)");
}

struct FitConfig {
  int max_iter = 100;
  double grad_tol = 1e-8;
  int max_step_halvings = 20;
  std::optional<Vector> start;  // defaults to the zero vector
};

enum class SeparationKind { None, QuasiComplete, Complete };

inline const char* separation_kind_name(SeparationKind k) {
  switch (k) {
    case SeparationKind::None: return "none";
    case SeparationKind::QuasiComplete: return "quasi-complete";
    case SeparationKind::Complete: return "complete";
  }
  return "?";
}

struct SeparationDiagnosis {
  SeparationKind kind = SeparationKind::None;
  std::optional<Vector> direction;  // unit max-norm; absent when kind == None
};

class SeparationError : public std::runtime_error {
 public:
  SeparationError(const std::string& msg, SeparationDiagnosis diag)
      : std::runtime_error(msg), diagnosis(std::move(diag)) {}
  SeparationDiagnosis diagnosis;
};

struct FitResult {
  Method method = Method::MLE;
  Vector beta;
  Vector std_errors;
  Matrix vcov;
  bool converged = false;
  int iterations = 0;
  double final_grad_norm = std::numeric_limits<double>::quiet_NaN();
  std::optional<SeparationDiagnosis> separation;
};

// An observation x with response 1 is "explained" by direction b when
// x'b > 0, one with response 0 when x'b < 0.  Separation detection maximises
// the number of observations with margin (2y-1) x'b >= 1 (capped), which a
// feasible LP expresses with slack targets s in [0,1] per observation.
inline SeparationDiagnosis detect_separation(const BinomialDataset& d) {
  validate(d);
  if (!has_integral_counts(d))
    throw std::invalid_argument("detect_separation: requires integer successes and trials");
  const BinomialDataset bin = disaggregate(d);
  const Index nn = bin.n_obs(), p = bin.n_coef();

  // Variables: s (nn), b+ (p), b- (p).  Constraints:
  //   s_i - (2 y_i - 1) x_i' (b+ - b-) <= 0
  //   s_i <= 1
  const Index nv = nn + 2 * p;
  Matrix a = Matrix::Zero(2 * nn, nv);
  Vector b = Vector::Zero(2 * nn);
  Vector c = Vector::Zero(nv);
  for (Index i = 0; i < nn; ++i) {
    const double sign = 2.0 * bin.y[i] - 1.0;
    a(i, i) = 1.0;
    a.row(i).segment(nn, p) = -sign * bin.X.row(i);
    a.row(i).segment(nn + p, p) = sign * bin.X.row(i);
    a(nn + i, i) = 1.0;
    b[nn + i] = 1.0;
    c[i] = 1.0;
  }

  const LinearProgramResult lp = simplex_maximize(c, a, b);
  if (!lp.bounded) throw std::logic_error("detect_separation: LP unexpectedly unbounded");

  SeparationDiagnosis diag;
  Index satisfied = 0;
  for (Index i = 0; i < nn; ++i)
    if (lp.x[i] > 1.0 - 1e-7) ++satisfied;
  if (lp.objective < 1e-7 || satisfied == 0) {
    diag.kind = SeparationKind::None;
    return diag;
  }
  diag.kind = satisfied == nn ? SeparationKind::Complete : SeparationKind::QuasiComplete;
  Vector dir = lp.x.segment(nn, p) - lp.x.segment(nn + p, p);
  const double scale = dir.cwiseAbs().maxCoeff();
  if (scale > 0.0) dir /= scale;
  diag.direction = std::move(dir);
  return diag;
}

namespace detail {

struct IrlsState {
  Vector beta;
  bool converged = false;
  int iterations = 0;
  double grad_norm = std::numeric_limits<double>::quiet_NaN();
  bool diverged = false;
};

inline Vector start_point(const BinomialDataset& d, const FitConfig& cfg) {
  if (!cfg.start) return Vector::Zero(d.n_coef());
  if (cfg.start->size() != d.n_coef())
    throw std::invalid_argument("fit: starting point length does not match the design");
  return *cfg.start;
}

inline void check_config(const FitConfig& cfg) {
  if (cfg.max_iter < 1) throw std::invalid_argument("fit: max_iter must be >= 1");
  if (!(cfg.grad_tol > 0.0)) throw std::invalid_argument("fit: grad_tol must be positive");
  if (cfg.max_step_halvings < 0) throw std::invalid_argument("fit: max_step_halvings must be >= 0");
}

[[noreturn]] inline void rethrow_rank_error(const BinomialDataset& d, const char* where) {
  const std::string why = describe_rank_deficiency(d);
  throw RankDeficientError(std::string(where) +
                           (why.empty() ? ": information matrix is rank deficient" : ": " + why));
}

// Fisher scoring for the ordinary likelihood, with step halving on decreases
// of the log likelihood.  The divergence guard stops once the estimate or the
// linear predictor runs away while the score is still large, which is the
// signature of separation.
inline IrlsState irls(const BinomialDataset& d, const FitConfig& cfg, double tol,
                      bool divergence_guard) {
  check_config(cfg);
  IrlsState st;
  st.beta = start_point(d, cfg);
  double ll = log_likelihood(d, st.beta);
  for (int it = 0; it < cfg.max_iter; ++it) {
    const ModelState s = evaluate_state(d, st.beta);
    const Vector u = d.X.transpose() * (d.y - d.m.cwiseProduct(s.pi));
    st.grad_norm = u.lpNorm<Eigen::Infinity>();
    st.iterations = it;
    if (st.grad_norm < tol) {
      st.converged = true;
      return st;
    }
    if (divergence_guard &&
        (st.beta.lpNorm<Eigen::Infinity>() > 30.0 || s.eta.lpNorm<Eigen::Infinity>() > 30.0)) {
      st.diverged = true;
      return st;
    }
    Eigen::LLT<Matrix> llt;
    try {
      llt = factor_information(Matrix(d.X.transpose() * s.w.asDiagonal() * d.X));
    } catch (const RankDeficientError&) {
      rethrow_rank_error(d, "fit");
    }
    const Vector delta = llt.solve(u);
    double step = 1.0;
    Vector best_beta = st.beta + delta;
    double best_ll = log_likelihood(d, best_beta);
    for (int h = 0; h < cfg.max_step_halvings && !(best_ll >= ll - 1e-10 * (1.0 + std::abs(ll)));
         ++h) {
      step *= 0.5;
      const Vector trial = st.beta + step * delta;
      const double trial_ll = log_likelihood(d, trial);
      if (trial_ll > best_ll) {
        best_beta = trial;
        best_ll = trial_ll;
      }
    }
    st.beta = best_beta;
    ll = best_ll;
  }
  const Vector u = score(d, st.beta);
  st.grad_norm = u.lpNorm<Eigen::Infinity>();
  st.iterations = cfg.max_iter;
  st.converged = st.grad_norm < tol;
  return st;
}

// Covariance at beta from the Fisher information of the ORIGINAL data; the
// adjusted-data estimators all report standard errors on this scale.
inline void fill_vcov(FitResult& r, const BinomialDataset& d) {
  const Index p = d.n_coef();
  try {
    const auto llt = factor_information(fisher_information(d, r.beta));
    r.vcov = llt.solve(Matrix::Identity(p, p));
    r.std_errors = r.vcov.diagonal().cwiseSqrt();
  } catch (const RankDeficientError&) {
    r.vcov = Matrix::Constant(p, p, std::numeric_limits<double>::quiet_NaN());
    r.std_errors = Vector::Constant(p, std::numeric_limits<double>::quiet_NaN());
  }
}

}  // namespace detail

inline FitResult fit_mle(const BinomialDataset& d, const FitConfig& cfg = {}) {
  validate(d);
  const detail::IrlsState st = detail::irls(d, cfg, cfg.grad_tol, /*divergence_guard=*/true);
  FitResult r;
  r.method = Method::MLE;
  r.beta = st.beta;
  r.converged = st.converged;
  r.iterations = st.iterations;
  r.final_grad_norm = st.grad_norm;
  detail::fill_vcov(r, d);
  if (has_integral_counts(d)) {
    // Under quasi-complete separation the score along the diverging direction
    // decays like exp(-eta) and can dip below grad_tol at a saturated but
    // finite estimate, so a small score alone does not prove the maximiser
    // exists.  A saturated linear predictor is the cue to consult the exact
    // LP detector; its verdict, not the heuristic, decides.
    const bool saturated = linear_predictor(d, st.beta).lpNorm<Eigen::Infinity>() > 15.0;
    if (!st.converged || saturated) {
      r.separation = detect_separation(d);
      if (r.separation->kind != SeparationKind::None) r.converged = false;
    }
  }
  return r;
}

inline FitResult fit_dy(const BinomialDataset& d, const FitConfig& cfg = {},
                        const std::optional<DYPrior>& prior = std::nullopt) {
  validate(d);
  const DYPrior pr = prior ? *prior : default_dy_prior(d);
  validate(d, pr);
  const BinomialDataset pseudo = pseudo_count_data(d, pr);
  // The penalized score is (1 + tau) times the pseudo-data score, so tighten
  // the inner tolerance accordingly.
  const detail::IrlsState st =
      detail::irls(pseudo, cfg, cfg.grad_tol / (1.0 + pr.tau), /*divergence_guard=*/false);
  FitResult r;
  r.method = Method::DY;
  r.beta = st.beta;
  r.iterations = st.iterations;
  r.final_grad_norm = penalized_score(d, st.beta, pr).lpNorm<Eigen::Infinity>();
  r.converged = st.converged && r.final_grad_norm < cfg.grad_tol;
  detail::fill_vcov(r, d);
  return r;
}

namespace detail {

// Modified score, penalized objective and Newton factor at one point.  The
// Newton matrix is the Jacobian of the modified score with the leverages held
// fixed, i.e. the information of the adjusted data (y + h/2, m + h); using it
// instead of the plain information avoids the slow crawl the latter causes
// when leverages are an appreciable fraction of the trial counts.
struct FirthEval {
  Vector u;
  double objective = 0.0;  // log likelihood + half log det information
  Eigen::LLT<Matrix> newton;
};

inline FirthEval firth_eval(const BinomialDataset& d, const Vector& beta) {
  const ModelState s = evaluate_state(d, beta);
  Eigen::LLT<Matrix> llt;
  try {
    llt = factor_information(Matrix(d.X.transpose() * s.w.asDiagonal() * d.X));
  } catch (const RankDeficientError&) {
    rethrow_rank_error(d, "fit");
  }
  const Vector h = leverages_from_factor(llt, d, s.w);
  FirthEval e;
  e.u = d.X.transpose() * (d.y + 0.5 * h - (d.m + h).cwiseProduct(s.pi));
  double ll = 0.0;
  for (Index i = 0; i < d.n_obs(); ++i) ll += d.y[i] * s.eta[i] - d.m[i] * softplus(s.eta[i]);
  e.objective = ll + Vector(llt.matrixLLT().diagonal()).array().log().sum();
  const Vector w_adj = s.w.array() * (d.m + h).array() / d.m.array();
  try {
    e.newton = factor_information(Matrix(d.X.transpose() * w_adj.asDiagonal() * d.X));
  } catch (const RankDeficientError&) {
    rethrow_rank_error(d, "fit");
  }
  return e;
}

}  // namespace detail

inline FitResult fit_firth(const BinomialDataset& d, const FitConfig& cfg = {}) {
  validate(d);
  detail::check_config(cfg);
  FitResult r;
  r.method = Method::Firth;
  r.beta = detail::start_point(d, cfg);

  detail::FirthEval e = detail::firth_eval(d, r.beta);
  Vector prev_delta;
  for (int it = 0; it < cfg.max_iter; ++it) {
    r.iterations = it;
    r.final_grad_norm = e.u.lpNorm<Eigen::Infinity>();
    if (r.final_grad_norm < cfg.grad_tol) {
      r.converged = true;
      detail::fill_vcov(r, d);
      return r;
    }
    const Vector delta = e.newton.solve(e.u);
    const double slack = 1e-10 * (1.0 + std::abs(e.objective));

    // The frozen-leverage Newton matrix yields linear convergence near
    // boundary solutions; when consecutive steps line up geometrically, sum
    // the series (Aitken) and let the objective decide whether to keep it.
    Vector best_beta = r.beta + delta;
    detail::FirthEval best = detail::firth_eval(d, best_beta);
    if (prev_delta.size() == delta.size()) {
      const double rho = delta.dot(prev_delta) / prev_delta.squaredNorm();
      const double align =
          delta.dot(prev_delta) / (delta.norm() * prev_delta.norm() + 1e-300);
      if (align > 0.98 && rho > 0.2 && rho < 0.98) {
        Vector boosted = r.beta + delta / (1.0 - rho);
        detail::FirthEval be = detail::firth_eval(d, boosted);
        if (be.objective > best.objective) {
          best_beta = std::move(boosted);
          best = std::move(be);
        }
      }
    }
    // Step halving on decreases of the penalized objective, keeping the best
    // candidate seen.
    double step = 1.0;
    for (int h = 0; h < cfg.max_step_halvings && !(best.objective >= e.objective - slack); ++h) {
      step *= 0.5;
      Vector trial = r.beta + step * delta;
      detail::FirthEval te = detail::firth_eval(d, trial);
      if (te.objective > best.objective) {
        best_beta = std::move(trial);
        best = std::move(te);
      }
    }
    prev_delta = best_beta - r.beta;
    r.beta = std::move(best_beta);
    e = std::move(best);
  }
  r.final_grad_norm = e.u.lpNorm<Eigen::Infinity>();
  r.iterations = cfg.max_iter;
  r.converged = r.final_grad_norm < cfg.grad_tol;
  detail::fill_vcov(r, d);
  return r;
}

inline FitResult fit_clogg(const BinomialDataset& d, const FitConfig& cfg = {}) {
  validate(d);
  const double sy = d.y.sum();
  if (!(sy > 0.0) || !(sy < d.total_trials()))
    throw std::invalid_argument(
        "clogg: undefined when no successes or no failures are observed");
  const BinomialDataset adj = clogg_adjust(d);
  const detail::IrlsState st = detail::irls(adj, cfg, cfg.grad_tol, /*divergence_guard=*/false);
  FitResult r;
  r.method = Method::Clogg;
  r.beta = st.beta;
  r.converged = st.converged;
  r.iterations = st.iterations;
  r.final_grad_norm = st.grad_norm;  // score norm on the adjusted data
  detail::fill_vcov(r, d);
  return r;
}

inline FitResult fit_cordeiro_mccullagh(const BinomialDataset& d, const FitConfig& cfg = {}) {
  validate(d);
  const double p = static_cast<double>(d.n_coef());
  const double mtot = d.total_trials();
  if (!(p < mtot))
    throw std::invalid_argument("cordeiro-mccullagh: requires more trials than coefficients");
  FitResult mle = fit_mle(d, cfg);
  if (!mle.converged) {
    if (mle.separation && mle.separation->kind != SeparationKind::None)
      throw SeparationError("cordeiro-mccullagh: maximum likelihood did not converge (" +
                                std::string(separation_kind_name(mle.separation->kind)) +
                                " separation detected)",
                            *mle.separation);
    throw std::runtime_error("cordeiro-mccullagh: maximum likelihood did not converge");
  }
  FitResult r;
  r.method = Method::CordeiroMcCullagh;
  r.beta = (1.0 - p / mtot) * mle.beta;
  r.converged = true;
  r.iterations = mle.iterations;
  r.final_grad_norm = mle.final_grad_norm;
  detail::fill_vcov(r, d);  // information evaluated at the deflated estimate
  return r;
}

inline FitResult fit(Method method, const BinomialDataset& d, const FitConfig& cfg = {}) {
  switch (method) {
    case Method::MLE: return fit_mle(d, cfg);
    case Method::DY: return fit_dy(d, cfg);
    case Method::Firth: return fit_firth(d, cfg);
    case Method::Clogg: return fit_clogg(d, cfg);
    case Method::CordeiroMcCullagh: return fit_cordeiro_mccullagh(d, cfg);
  }
  throw std::logic_error("fit: unknown method");
}

// Per-coefficient Wald intervals: beta_r -/+ z_{(1+level)/2} se_r, one row per
// coefficient.
inline Matrix wald_intervals(const FitResult& r, double level = 0.95) {
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("wald_intervals: level must lie in (0,1)");
  const double z = normal_quantile(0.5 * (1.0 + level));
  Matrix ci(r.beta.size(), 2);
  ci.col(0) = r.beta - z * r.std_errors;
  ci.col(1) = r.beta + z * r.std_errors;
  return ci;
}

}  // namespace brlogit

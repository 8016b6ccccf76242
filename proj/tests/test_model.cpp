#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "brlogit/model.hpp"
#include "oracles.hpp"

using namespace brlogit;
using Catch::Approx;

TEST_CASE("log likelihood matches naive extended-precision summation", "[model]") {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 20; ++t) {
    const BinomialDataset d = oracle::random_dataset(rng, 40, 4, 7);
    const Vector beta = oracle::random_beta(rng, 4, 1.2);
    const double got = log_likelihood(d, beta);
    const double want = oracle::loglik_naive(d, beta);
    CHECK(got == Approx(want).epsilon(1e-13));
  }
}

TEST_CASE("log likelihood at zero is -(total trials) log 2", "[model]") {
  std::mt19937_64 rng(11);
  const BinomialDataset d = oracle::random_dataset(rng, 25, 3, 4);
  CHECK(log_likelihood(d, Vector::Zero(3)) ==
        Approx(-d.total_trials() * std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("score equals the finite-difference gradient", "[model]") {
  std::mt19937_64 rng(31337);
  for (int t = 0; t < 20; ++t) {
    const BinomialDataset d = oracle::random_dataset(rng, 30, 4, 5);
    const Vector beta = oracle::random_beta(rng, 4, 0.8);
    const Vector u = score(d, beta);
    const Vector fd = oracle::fd_gradient(
        [&](const Vector& b) { return oracle::loglik_naive(d, b); }, beta);
    const double scale = 1.0 + fd.lpNorm<Eigen::Infinity>();
    CHECK((u - fd).lpNorm<Eigen::Infinity>() / scale < 1e-6);
  }
}

TEST_CASE("Fisher information equals the negative finite-difference Hessian", "[model]") {
  std::mt19937_64 rng(5150);
  for (int t = 0; t < 10; ++t) {
    const BinomialDataset d = oracle::random_dataset(rng, 35, 3, 4);
    const Vector beta = oracle::random_beta(rng, 3, 0.6);
    const Matrix info = fisher_information(d, beta);
    const Matrix fd = -oracle::fd_hessian(
        [&](const Vector& b) { return oracle::loglik_naive(d, b); }, beta);
    const double scale = 1.0 + fd.cwiseAbs().maxCoeff();
    CHECK((info - fd).cwiseAbs().maxCoeff() / scale < 1e-5);
  }
}

TEST_CASE("information matrix is symmetric positive definite", "[model]") {
  std::mt19937_64 rng(404);
  const BinomialDataset d = oracle::random_dataset(rng, 50, 4, 3);
  const Vector beta = oracle::random_beta(rng, 4, 0.5);
  const Matrix info = fisher_information(d, beta);
  CHECK((info - info.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  Eigen::SelfAdjointEigenSolver<Matrix> es(info);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("leverages agree with the dense hat matrix and sum to p", "[model]") {
  std::mt19937_64 rng(808);
  for (int t = 0; t < 10; ++t) {
    const Index n = 30, p = 4;
    const BinomialDataset d = oracle::random_dataset(rng, n, p, 6);
    const Vector beta = oracle::random_beta(rng, p, 0.7);
    const Vector h = leverages(d, beta);
    const Vector dense = oracle::hat_diagonal_dense(d, predict_probs(d, beta));
    CHECK((h - dense).lpNorm<Eigen::Infinity>() < 1e-10);
    CHECK(h.sum() == Approx(static_cast<double>(p)).margin(1e-8));
    CHECK(h.minCoeff() > -1e-12);
    CHECK(h.maxCoeff() < 1.0 + 1e-12);
  }
}

TEST_CASE("saturated designs have unit leverages", "[model]") {
  std::mt19937_64 rng(90210);
  for (int m : {1, 4, 9}) {
    const BinomialDataset d = oracle::saturated_balanced_dataset(rng, 5, m);
    const Vector beta = oracle::random_beta(rng, 5, 0.4);
    const Vector h = leverages(d, beta);
    for (Index i = 0; i < h.size(); ++i) CHECK(h[i] == Approx(1.0).margin(1e-9));
  }
}

TEST_CASE("predicted probabilities saturate without NaN", "[model]") {
  BinomialDataset d;
  d.X.resize(3, 1);
  d.X << 800.0, -800.0, 0.0;
  d.y.resize(3);
  d.y << 1, 0, 1;
  d.m = Vector::Ones(3);
  const Vector pi = predict_probs(d, Vector::Ones(1));
  CHECK(pi.allFinite());
  CHECK(pi[0] == 1.0);
  CHECK(pi[1] >= 0.0);
  CHECK(pi[1] < 1e-300);
  CHECK(pi[2] == 0.5);
  CHECK(std::isfinite(log_likelihood(d, Vector::Ones(1))));
}

TEST_CASE("rank-deficient designs are reported with column names", "[model]") {
  std::mt19937_64 rng(757);
  BinomialDataset d = oracle::random_dataset(rng, 25, 3, 2);
  d.X.conservativeResize(Eigen::NoChange, 4);
  d.X.col(3) = d.X.col(1);  // exact duplicate
  d.column_names = {"(intercept)", "a", "b", "a_copy"};
  const Vector beta = Vector::Zero(4);
  try {
    leverages(d, beta);
    FAIL("expected RankDeficientError");
  } catch (const RankDeficientError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("rank") != std::string::npos);
    const bool names_one = msg.find("a_copy") != std::string::npos ||
                           msg.find(" a") != std::string::npos;
    CHECK(names_one);
  }
}

TEST_CASE("dimension mismatches throw", "[model]") {
  std::mt19937_64 rng(1);
  const BinomialDataset d = oracle::random_dataset(rng, 10, 3, 1);
  CHECK_THROWS_AS(log_likelihood(d, Vector::Zero(2)), std::invalid_argument);
  CHECK_THROWS_AS(score(d, Vector::Zero(5)), std::invalid_argument);
}

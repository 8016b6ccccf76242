#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include "brlogit/io.hpp"
#include "oracles.hpp"

using namespace brlogit;
using Catch::Approx;

TEST_CASE("read_csv parses a well-formed table", "[io]") {
  std::istringstream is(
      "y,m,x1,x2\r\n"
      "3,10,0.5,-1\n"
      "0,2,1.5e-1,2\n"
      "\n");
  const CsvTable t = read_csv(is);
  REQUIRE(t.columns.size() == 4);
  CHECK(t.columns[0] == "y");
  CHECK(t.columns[3] == "x2");
  REQUIRE(t.values.rows() == 2);
  CHECK(t.values(0, 0) == 3.0);
  CHECK(t.values(1, 2) == Approx(0.15));
  CHECK(t.column_index("m") == 1);
  CHECK_THROWS_AS(t.column_index("nope"), std::invalid_argument);
}

TEST_CASE("read_csv rejects malformed input with line numbers", "[io]") {
  const auto expect_error = [](const std::string& text, const std::string& fragment) {
    std::istringstream is(text);
    try {
      read_csv(is);
      FAIL("expected a parse error containing '" + fragment + "'");
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find(fragment) != std::string::npos);
    }
  };
  expect_error("", "header");
  expect_error("a,b\n", "no data");
  expect_error("a,b\n1\n", "line 2");
  expect_error("a,b\n1,x\n", "not a number");
  expect_error("a,b\n1,nan\n", "line 2");
  expect_error("a,b\n1,inf\n", "line 2");
  expect_error("a,b\n1,\n", "empty field");
  expect_error("a,,c\n1,2,3\n", "empty column name");
}

TEST_CASE("dataset_from_csv maps columns through the schema", "[io]") {
  std::istringstream is(
      "y,m,x1,x2\n"
      "3,10,0.5,-1\n"
      "1,5,-0.25,2\n");
  const CsvTable t = read_csv(is);

  SECTION("default covariates with intercept") {
    CsvSchema schema;
    schema.response = "y";
    schema.trials = "m";
    const BinomialDataset d = dataset_from_csv(t, schema);
    REQUIRE(d.n_coef() == 3);
    CHECK(d.column_names[0] == "(intercept)");
    CHECK(d.column_names[1] == "x1");
    CHECK(d.column_names[2] == "x2");
    CHECK(d.X(0, 0) == 1.0);
    CHECK(d.X(1, 2) == 2.0);
    CHECK(d.y[0] == 3.0);
    CHECK(d.m[1] == 5.0);
  }
  SECTION("explicit covariates, no intercept, Bernoulli trials") {
    std::istringstream bin(
        "y,x1,x2\n"
        "1,0.5,-1\n"
        "0,-0.25,2\n");
    const CsvTable tb = read_csv(bin);
    CsvSchema schema;
    schema.response = "y";
    schema.covariates = {"x2"};
    schema.add_intercept = false;
    const BinomialDataset d = dataset_from_csv(tb, schema);
    REQUIRE(d.n_coef() == 1);
    CHECK(d.column_names[0] == "x2");
    CHECK(d.m.isOnes());
  }
  SECTION("schema errors") {
    CsvSchema schema;
    schema.response = "y";
    schema.covariates = {"y"};
    CHECK_THROWS_AS(dataset_from_csv(t, schema), std::invalid_argument);
    schema.covariates = {"ghost"};
    CHECK_THROWS_AS(dataset_from_csv(t, schema), std::invalid_argument);
  }
  SECTION("fractional responses are rejected") {
    std::istringstream bad(
        "y,x\n"
        "0.5,1\n");
    const CsvTable tb = read_csv(bad);
    CsvSchema schema;
    schema.response = "y";
    CHECK_THROWS_AS(dataset_from_csv(tb, schema), std::invalid_argument);
  }
  SECTION("successes above trials are rejected") {
    std::istringstream bad(
        "y,m,x\n"
        "7,5,1\n");
    const CsvTable tb = read_csv(bad);
    CsvSchema schema;
    schema.response = "y";
    schema.trials = "m";
    CHECK_THROWS_AS(dataset_from_csv(tb, schema), std::invalid_argument);
  }
}

TEST_CASE("fit results round-trip through JSON bit for bit", "[io]") {
  std::mt19937_64 rng(606);
  const BinomialDataset d = oracle::random_dataset(rng, 40, 3, 2);
  const FitResult r = fit_dy(d);
  REQUIRE(r.converged);
  const nlohmann::json j = fit_to_json(r, {"a", "b", "c"}, 0.9);
  const nlohmann::json reparsed = nlohmann::json::parse(j.dump());
  const FitResult back = fit_from_json(reparsed);
  CHECK(back.method == r.method);
  CHECK(back.converged == r.converged);
  CHECK(back.iterations == r.iterations);
  REQUIRE(back.beta.size() == r.beta.size());
  for (Index k = 0; k < r.beta.size(); ++k) {
    CHECK(back.beta[k] == r.beta[k]);  // exact, not approximate
    CHECK(back.std_errors[k] == r.std_errors[k]);
  }
  for (Index a = 0; a < r.vcov.rows(); ++a)
    for (Index b = 0; b < r.vcov.cols(); ++b) CHECK(back.vcov(a, b) == r.vcov(a, b));
  CHECK(back.final_grad_norm == r.final_grad_norm);
  CHECK(j.at("ci_level").get<double>() == 0.9);
  CHECK(j.at("coefficients")[0].at("name") == "a");
}

TEST_CASE("non-finite standard errors survive as nulls", "[io]") {
  FitResult r;
  r.method = Method::MLE;
  r.beta = Vector::Zero(2);
  r.std_errors = Vector::Constant(2, std::numeric_limits<double>::quiet_NaN());
  r.vcov = Matrix::Constant(2, 2, std::numeric_limits<double>::quiet_NaN());
  r.converged = false;
  r.final_grad_norm = 0.5;
  const std::string text = fit_to_json(r, {}, 0.95).dump();
  const FitResult back = fit_from_json(nlohmann::json::parse(text));
  CHECK(std::isnan(back.std_errors[0]));
  CHECK(std::isnan(back.vcov(1, 1)));
  CHECK(back.beta[0] == 0.0);
}

TEST_CASE("separation diagnoses serialize with coefficient names", "[io]") {
  SeparationDiagnosis diag;
  diag.kind = SeparationKind::QuasiComplete;
  Vector dir(2);
  dir << 0.0, 1.0;
  diag.direction = dir;
  const nlohmann::json j = diagnosis_to_json(diag, {"(intercept)", "flag"});
  CHECK(j.at("kind") == "quasi-complete");
  REQUIRE(j.at("direction").size() == 2);
  CHECK(j["direction"][1].at("coefficient") == "flag");
  CHECK(j["direction"][1].at("value").get<double>() == 1.0);
}

TEST_CASE("scenario reports serialize methods, blocks and timings", "[io]") {
  ScenarioConfig cfg;
  cfg.n = 30;
  cfg.p = 5;
  cfg.n_reps = 4;
  cfg.seed = 12;
  cfg.true_beta = make_highdim_beta(5);
  cfg.methods = {Method::DY, Method::Firth};
  const ScenarioReport rep = run_scenario(cfg);
  const nlohmann::json j = report_to_json(rep);
  CHECK(j.at("n") == 30);
  CHECK(j.at("reps") == 4);
  REQUIRE(j.at("methods").size() == 2);
  CHECK(j["methods"][0].at("method") == "dy");
  CHECK(j["methods"][0].at("blocks").size() == 5);
  CHECK(j["methods"][1].contains("mean_ms"));
  CHECK(j["methods"][1].contains("median_ms"));
}

TEST_CASE("grid CSV emits one row per node", "[io]") {
  std::mt19937_64 rng(31);
  const BinomialDataset d = oracle::random_dataset(rng, 20, 2, 1, 0.5, false);
  const PriorGrid g = prior_density_grid(d, PriorSpec::make_cauchy(), -2.0, 2.0, 5);
  std::ostringstream os;
  write_grid_csv(g, os);
  const std::string text = os.str();
  CHECK(text.rfind("beta1,beta2,log_density\n", 0) == 0);
  int lines = 0;
  for (char ch : text)
    if (ch == '\n') ++lines;
  CHECK(lines == 26);  // header + 25 nodes
}

#include "chpar/config.hpp"
#include "chpar/experiment.hpp"

#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

using namespace chpar;

TEST_CASE("flags produce the baseline config") {
  auto c = parse_config({"--algorithm", "pa1", "--T", "1", "--N", "20", "--J", "200", "--h-den",
                         "64", "--eps", "0.0725"});
  CHECK(c.algorithm == Variant::PA1);
  CHECK(c.T == 1.0);
  CHECK(c.N == 20);
  CHECK(c.J == 200);
  CHECK(c.h_den == 64);
  CHECK(c.eps == 0.0725);
  CHECK(c.resolved_max_iter() == 22);
  CHECK(c.grid() == SpatialGrid(1, 65));
}

TEST_CASE("neumann-neumann flags") {
  auto c = parse_config(
      {"--algorithm", "pa1", "--h-den", "128", "--fine", "nn", "--nn-sub", "8", "--theta", "0.25"});
  REQUIRE(c.nn_params());
  CHECK(c.nn_params()->subdomains == 8);
  CHECK(c.nn_params()->theta == 0.25);
  CHECK_THROWS_AS(parse_config({"--algorithm", "pa2", "--fine", "nn"}), ConfigError);
  CHECK_THROWS_AS(parse_config({"--algorithm", "pa1", "--fine", "nn", "--dim", "2"}),
                  ConfigError);
}

TEST_CASE("invalid input is rejected with the field name") {
  auto message = [](std::vector<std::string> args) {
    try {
      (void)parse_config(args);
    } catch (const ConfigError &e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message({"--N", "20"}).find("algorithm") != std::string::npos);
  CHECK(message({"--algorithm", "pa9"}).find("algorithm") != std::string::npos);
  CHECK(message({"--algorithm", "pa1", "--eps", "abc"}).find("eps") != std::string::npos);
  CHECK(message({"--algorithm", "pa1", "--N", "0"}).find("N") != std::string::npos);
  CHECK(message({"--algorithm", "pa1", "--bogus", "1"}).find("bogus") != std::string::npos);
  CHECK_THROWS_AS(parse_config_text("nonsense"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("colour=red"), ConfigError);
}

TEST_CASE("presets") {
  const RunConfig small = preset("pa1-fig1-small-eps");
  RunConfig large = preset("pa1-fig1-large-eps");
  CHECK(large.eps == 0.725);
  large.eps = small.eps;
  large.preset = small.preset;
  CHECK(large == small);
  const auto n2 = preset("npa2-baseline");
  CHECK(n2.algorithm == Variant::NPA2);
  CHECK(n2.J == 150);
  CHECK(preset("pa1-nn").fine == FineSolver::NeumannNeumann);
  CHECK(preset("pa1-fig1-small-eps-2d").h_den == 32);
  try {
    (void)preset("nope");
    FAIL("expected an error");
  } catch (const ConfigError &e) {
    CHECK(std::string(e.what()).find("pa2-baseline") != std::string::npos);
  }
  for (const auto &n : preset_names())
    CHECK_NOTHROW(preset(n).validate());
}

TEST_CASE("precedence: defaults < preset < file < flags") {
  const std::string path = "test_config_precedence.cfg";
  {
    std::ofstream f(path);
    f << "# comment\n\neps = 0.3\nN=10\n";
  }
  auto c = parse_config({"--preset", "pa1-fig1-large-eps", "--config", path, "--N", "7"});
  CHECK(c.eps == 0.3);
  CHECK(c.N == 7);
  CHECK(c.J == 200);
  std::remove(path.c_str());
}

TEST_CASE("settings round-trip") {
  RunConfig c = preset("pa1-nn");
  c.seed = 99;
  c.tol = 1.0 / 3.0;
  c.nn_warm_start = true;
  c.max_iter = 5;
  RunConfig back;
  for (const auto &[k, v] : to_settings(c))
    apply_setting(back, k, v);
  CHECK(back == c);
}

TEST_CASE("initial conditions") {
  RunConfig c;
  const SpatialGrid g(1, 65);
  const Field a = initial_condition(c, g);
  CHECK(identical(a, initial_condition(c, g)));
  CHECK(a.values().cwiseAbs().maxCoeff() <= 0.1);
  c.seed += 1;
  CHECK_FALSE(identical(a, initial_condition(c, g)));
  c.init = InitKind::SmoothSine;
  const Field s = initial_condition(c, g);
  CHECK(s.values()[31] == doctest::Approx(0.1)); // x = 1/2
  const SpatialGrid g2(2, 5);
  const Field s2 = initial_condition(c, g2);
  CHECK(s2.values()[4] == doctest::Approx(0.1)); // centre node
  CHECK(s2.values()[0] == doctest::Approx(0.05));
}

TEST_CASE("trace write and read") {
  RunConfig c;
  c.algorithm = Variant::PA2;
  c.N = 4;
  c.J = 5;
  c.h_den = 16;
  c.tol = 1e-10;
  const auto res = run_experiment(c);
  CHECK(res.exit_code() == 0);
  std::stringstream ss;
  write_trace(ss, res);
  const TraceFile tf = read_trace(ss);
  CHECK(tf.config == c);
  REQUIRE(tf.rows.size() == res.trace.records.size());
  for (std::size_t k = 0; k < tf.rows.size(); ++k) {
    CHECK(tf.rows[k].error == res.trace.records[k].error);
    CHECK(tf.rows[k].bound == *res.trace.records[k].bound);
  }
  bool has_alpha = false;
  for (const auto &[k, v] : tf.info)
    has_alpha = has_alpha || k == "alpha";
  CHECK(has_alpha);

  std::istringstream bad("k,error\n1,2\n");
  CHECK_THROWS_AS(read_trace(bad), ConfigError);
}

TEST_CASE("nonlinear runs record the estimated constant") {
  RunConfig c;
  c.algorithm = Variant::NPA1;
  c.N = 4;
  c.J = 4;
  c.h_den = 16;
  c.T = 0.5;
  const auto res = run_experiment(c);
  REQUIRE(res.lte_constant);
  CHECK(*res.lte_constant > 0.0);
  std::stringstream ss;
  write_trace(ss, res);
  CHECK(ss.str().find("# info.lte_constant=") != std::string::npos);
}

TEST_CASE("solver failures give a partial trace and exit code 1") {
  RunConfig c;
  c.algorithm = Variant::PA1;
  c.fine = FineSolver::NeumannNeumann;
  c.nn_max_iter = 1;
  c.N = 4;
  c.J = 4;
  c.h_den = 16;
  const auto res = run_experiment(c);
  CHECK(res.failure);
  CHECK(res.exit_code() == 1);
}

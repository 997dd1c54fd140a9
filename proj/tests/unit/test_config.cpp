#include <doctest.h>

#include <cmath>

#include "roughspde/config.hpp"

using namespace roughspde;
using nlohmann::json;

namespace {
const std::filesystem::path data = ROUGHSPDE_TEST_DATA;
}

TEST_SUITE("config") {

TEST_CASE("scheme by name and by object") {
  auto a = scheme_from_json("fd_forward");
  CHECK(a.name == "fd_forward");
  auto b = scheme_from_json(json{{"builtin", "central"}});
  CHECK(b.name == "central");
  auto c = scheme_from_json(json::parse(R"({"name": "w", "m": "1 + x^2/12", "h": "1", "mu": [[2, 0.5], [0, -0.5]]})"));
  CHECK(c.name == "w");
  CHECK(c.m(0.3) == doctest::Approx(1 + 0.09 / 12));
  CHECK(c.h(5.0) == 1.0);
  REQUIRE(c.mu.atoms.size() == 2);
  CHECK(c.mu.moment(1) == doctest::Approx(1.0));
  CHECK(validate_scheme(c).ok());
}

TEST_CASE("file scheme equals the builtin grid-tied scheme") {
  auto f = load_scheme(data / "fd_forward.json");
  auto b = builtin_scheme("fd_forward");
  for (double x : {0.0, 0.5, 2.0, 3.1, 3.5}) {
    CHECK(f.m(x) == b.m(x));
    CHECK(f.h(x) == b.h(x));
  }
  CHECK(compute_lambda(f, 1, 1).value == doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("comments are allowed and string numbers are expressions") {
  auto s = load_scheme(data / "smooth_scheme.json");
  CHECK(s.h(1.0) == doctest::Approx(std::exp(-1.0)));
  CHECK(s.mu.mass() == doctest::Approx(0.0));
  auto e = experiment_from_json(json::parse(R"({"epsilon_levels": ["2^-4", "2^-5", 0.01], "seeds": [3]})"));
  REQUIRE(e.epsilon_levels.size() == 3);
  CHECK(e.epsilon_levels[0] == 0.0625);
  CHECK(e.epsilon_levels[2] == 0.01);
}

TEST_CASE("invalid scheme files still load but fail validation") {
  auto s = load_scheme(data / "bad_scheme.json");
  CHECK_FALSE(validate_scheme(s).ok());
}

TEST_CASE("problems") {
  std::string name;
  auto b = problem_from_json("burgers", &name);
  CHECK(name == "burgers");
  CHECK(b.has_G());
  auto l = problem_from_json(json{{"builtin", "linear"}, {"nu", 2}, {"sigma", 0.5}});
  CHECK(l.nu == 2);
  CHECK(l.sigma == 0.5);
  CHECK_FALSE(l.has_G());
  auto f = load_problem(data / "burgers.json");
  CHECK(f.n == 1);
  CHECK(f.has_G());
  auto two = problem_from_json(json::parse(R"j({"n": 2, "G": ["u1", "0", "0", "u2"], "initial": ["sin(x)", "0"]})j"));
  CHECK(two.n == 2);
  CHECK_FALSE(two.has_F());
}

TEST_CASE("experiment files") {
  auto e = load_experiment(data / "tiny_study.json");
  CHECK(e.epsilon_levels == std::vector<double>{0.25, 0.125});
  CHECK(e.seeds == std::vector<uint64_t>{0, 1});
  CHECK(e.T == 0.02);
  CHECK(e.n_out == 4);
  CHECK(e.reference_factor == 2);
  CHECK_FALSE(e.lambda);
  CHECK(e.problem_name == "burgers");
  auto f = experiment_from_json(json::parse(R"({"levels": [4], "n_seeds": 3, "seed_start": 10, "lambda": 0.2})"));
  CHECK(f.seeds == std::vector<uint64_t>{10, 11, 12});
  REQUIRE(f.lambda);
  CHECK(*f.lambda == 0.2);
  auto g = experiment_from_json(json::parse(R"({"levels": [4], "lambda": "auto"})"));
  CHECK_FALSE(g.lambda);
}

TEST_CASE("error paths") {
  CHECK_THROWS_AS(scheme_from_json("no_such_scheme"), ConfigError);
  CHECK_THROWS_AS(scheme_from_json(json::parse(R"({"m": "1 +", "mu": [[1, 1], [0, -1]]})")), ConfigError);
  CHECK_THROWS_AS(scheme_from_json(json::parse(R"({"m": "@nope", "mu": [[1, 1], [0, -1]]})")), ConfigError);
  CHECK_THROWS_AS(scheme_from_json(json::parse(R"({"m": "1"})")), ConfigError);
  CHECK_THROWS_AS(scheme_from_json(json::parse(R"({"mu": [[1, 1, 1]]})")), ConfigError);
  CHECK_THROWS_AS(problem_from_json("heat"), ConfigError);
  CHECK_THROWS_AS(problem_from_json(json::parse(R"({"n": 2, "F": ["0"]})")), ConfigError);
  CHECK_THROWS_AS(experiment_from_json(json::parse(R"({"seeds": [1]})")), ConfigError);
  CHECK_THROWS_AS(experiment_from_json(json::parse(R"({"levels": [4], "typo": 1})")), ConfigError);
  CHECK_THROWS_AS(load_experiment(data / "missing.json"), ConfigError);
  try {
    load_experiment(data / "missing.json");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("missing.json") != std::string::npos);
  }
}

}  // TEST_SUITE

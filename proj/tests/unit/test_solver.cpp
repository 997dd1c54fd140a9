#include <doctest.h>

#include <cmath>

#include "roughspde/gaussian_field.hpp"
#include "roughspde/norms.hpp"
#include "roughspde/solver.hpp"

using namespace roughspde;

namespace {

double mean_of(const TrajectoryState& s) { return s.u.at(0, 0).real() / kSqrt2Pi; }

// deterministic run with the noise switched off
TrajectoryState run_quiet(const ProblemSpec& p, int N, const SchemeSpec* scheme, double eps, double dt, int steps,
                          double lambda = 0.0, bool corrected = false) {
  CoupledGaussianState noise({{scheme, eps, N / 2 - 1}}, p.n, 0, p.nu, p.sigma);
  auto s = make_trajectory(p, N, scheme, eps, dt, 0);
  for (int i = 0; i < steps; ++i) {
    noise.evolve(dt);
    if (corrected) step_corrected_limit(s, p, lambda, noise);
    else step_approximate(s, p, noise);
  }
  return s;
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("problem construction and derived expressions") {
  auto b = ProblemSpec::burgers();
  CHECK(b.n == 1);
  CHECK(b.has_G());
  CHECK_FALSE(b.has_F());
  auto d = b.div_G();
  double c;
  REQUIRE(d[0].is_constant(&c));
  CHECK(c == 1.0);
  auto p = ProblemSpec::from_strings(2, 1, 1, {"0", "u1"}, {"u1*u2", "0", "sin(u1)", "u2^2"}, {"sin(x)", "cos(x)"});
  auto dg = p.div_G();
  std::vector<double> u = {0.3, 0.7};
  CHECK(dg[0].eval(u) == doctest::Approx(0.7 + 0.0));             // d/du1 (u1 u2) + d/du2 0
  CHECK(dg[1].eval(u) == doctest::Approx(std::cos(0.3) + 2 * 0.7));  // d/du1 sin(u1) + d/du2 u2^2
  auto G = p.G_function(2);
  CHECK(G.deriv(u, 0, 0, Word{0, 1}) == doctest::Approx(1.0));
  CHECK(G.deriv(u, 1, 0, Word{0}) == doctest::Approx(std::cos(0.3)));
  CHECK_THROWS_AS(G.deriv(u, 0, 0, Word{0, 0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(ProblemSpec::from_strings(2, 1, 1, {"0"}, {"0", "0", "0", "0"}, {"0", "0"}), std::invalid_argument);
  CHECK_THROWS_AS(ProblemSpec::from_strings(1, 0, 1, {"0"}, {"0"}, {"0"}), std::invalid_argument);
}

TEST_CASE("u and u1 are aliases in one dimension") {
  auto p = ProblemSpec::from_strings(1, 1, 1, {"0"}, {"u1*u"}, {"sin(x)"});
  auto d = p.div_G();
  CHECK(d[0].eval(std::vector<double>{0.4, 0.4}) == doctest::Approx(0.8));
}

TEST_CASE("pure approximate heat flow decays each mode exactly") {
  auto p = ProblemSpec::from_strings(1, 0.7, 0.0, {"0"}, {"0"}, {"sin(x) + cos(5*x)"});
  auto fd = builtin_scheme("fd_forward");
  const int N = 32;
  const double eps = 2 * kPi / N, dt = 0.01;
  auto s0 = make_trajectory(p, N, &fd, eps, dt, 0);
  auto s = run_quiet(p, N, &fd, eps, dt, 10);
  for (int k : {1, 5}) {
    double m = fd.m(eps * k);
    double expect = std::exp(-0.7 * k * k * m * 0.1);
    CHECK(std::abs(s.u.at(0, k)) == doctest::Approx(std::abs(s0.u.at(0, k)) * expect).epsilon(1e-12));
  }
  CHECK(s.t == doctest::Approx(0.1));
}

TEST_CASE("linear sector equals the Gaussian field evolution") {
  auto p = ProblemSpec::from_strings(1, 1, 1, {"0"}, {"0"}, {"0"});
  auto fd = builtin_scheme("fd_forward");
  const int N = 64;
  const double eps = 2 * kPi / N, dt = 1e-3;
  CoupledGaussianState noise({{&fd, eps, N / 2 - 1}}, 1, 17);
  auto X0 = assemble_channel(noise, 0, N);
  auto s = make_trajectory(p, N, &fd, eps, dt, 0);
  const int steps = 50;
  for (int i = 0; i < steps; ++i) {
    noise.evolve(dt);
    step_approximate(s, p, noise);
  }
  auto X = assemble_channel(noise, 0, N);
  for (int k = 1; k < N / 2; ++k) {
    if (!noise.active(0, k)) continue;
    cplx expect = X.at(0, k) - std::exp(-noise.rate(0, k) * dt * steps) * X0.at(0, k);
    CHECK(std::abs(s.u.at(0, k) - expect) < 1e-12);
  }
  CHECK(s.u.at(0, 0).real() == doctest::Approx(X.at(0, 0).real() - X0.at(0, 0).real()));
}

TEST_CASE("long-run mode variance matches the stationary OU variance") {
  auto p = ProblemSpec::linear();
  const int N = 16, seeds = 100, steps = 1000;
  const double dt = 0.01;
  double acc[4] = {0, 0, 0, 0};
  for (int sd = 0; sd < seeds; ++sd) {
    CoupledGaussianState noise({{nullptr, 0, N / 2 - 1}}, 1, 500 + sd);
    auto s = make_trajectory(p, N, nullptr, 0, dt, 0);
    for (int i = 0; i < steps; ++i) {
      noise.evolve(dt);
      step_approximate(s, p, noise);
    }
    for (int k = 1; k <= 4; ++k) acc[k - 1] += std::norm(s.u.at(0, k));
  }
  // E|u^(k)|^2 = amp^2 = 1/(2 k^2); the sin x initial data has decayed by e^{-10}
  double pooled = 0;
  for (int k = 1; k <= 4; ++k) pooled += acc[k - 1] / seeds * 2.0 * k * k;
  pooled /= 4;
  // 800 chi-square(1)/1 samples, sd of mean = sqrt(2/800) = 0.05
  CHECK(std::abs(pooled - 1.0) < 0.2);
}

TEST_CASE("Burgers conserves the mean in the spectral scheme") {
  auto p = ProblemSpec::from_strings(1, 0.1, 0.0, {"0"}, {"u"}, {"0.3 + sin(x) + 0.5*cos(2*x)"});
  auto s0 = make_trajectory(p, 64, nullptr, 0, 1e-3, 0);
  auto s = run_quiet(p, 64, nullptr, 0, 1e-3, 1000);
  CHECK(std::abs(mean_of(s) - mean_of(s0)) < 1e-10);
}

TEST_CASE("conservative spectral Burgers versus central differences converges at second order") {
  auto p = ProblemSpec::from_strings(1, 1.0, 0.0, {"0"}, {"u"}, {"sin(x)"});
  auto central = builtin_scheme("central");
  const double dt = 1e-4;
  const int steps = 1000;  // t = 0.1
  std::vector<double> err;
  for (int N : {32, 64}) {
    double eps = 2 * kPi / N;
    auto ref = run_quiet(p, N, nullptr, 0, dt, steps);
    auto cd = run_quiet(p, N, &central, eps, dt, steps);
    auto a = inverse_transform(ref.u), b = inverse_transform(cd.u);
    double e = 0;
    for (size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]));
    err.push_back(e);
  }
  CHECK(err[0] > 0);
  CHECK(err[0] / err[1] > 3.5);
  CHECK(err[0] / err[1] < 4.5);
}

TEST_CASE("corrected limit with Lambda = 0 equals the exact approximate step") {
  auto p = ProblemSpec::burgers();
  const int N = 32;
  const double dt = 1e-3;
  CoupledGaussianState noise({{nullptr, 0, N / 2 - 1}}, 1, 3);
  auto a = make_trajectory(p, N, nullptr, 0, dt, 0), b = a;
  for (int i = 0; i < 20; ++i) {
    noise.evolve(dt);
    step_approximate(a, p, noise);
    step_corrected_limit(b, p, 0.0, noise);
  }
  CHECK(a.u.raw() == b.u.raw());
  auto fd = builtin_scheme("fd_forward");
  auto c = make_trajectory(p, N, &fd, 0.2, dt, 0);
  CHECK_THROWS_AS(step_corrected_limit(c, p, 0.25, noise), std::invalid_argument);
}

TEST_CASE("Lambda shifts the mean by -Lambda t when G(u) = u") {
  auto p = ProblemSpec::from_strings(1, 1.0, 0.0, {"0"}, {"u"}, {"sin(x)"});
  auto s0 = make_trajectory(p, 32, nullptr, 0, 1e-3, 0);
  auto s = run_quiet(p, 32, nullptr, 0, 1e-3, 200, 0.25, true);
  CHECK(mean_of(s) - mean_of(s0) == doctest::Approx(-0.25 * 0.2).epsilon(1e-10));
}

TEST_CASE("step argument checks") {
  auto p = ProblemSpec::linear();
  CoupledGaussianState noise({{nullptr, 0, 7}}, 1, 0);
  auto s = make_trajectory(p, 16, nullptr, 0, 0.01, 0);
  CHECK_THROWS_AS(step_approximate(s, p, noise), std::invalid_argument);  // noise not evolved yet
  noise.evolve(0.02);
  CHECK_THROWS_AS(step_approximate(s, p, noise), std::invalid_argument);  // dt mismatch
  auto q = ProblemSpec::linear(1.0, 2.0);
  noise.evolve(0.01);
  CHECK_THROWS_AS(step_approximate(s, q, noise), std::invalid_argument);  // sigma mismatch
}

TEST_CASE("blow-up carries the failing time") {
  auto p = ProblemSpec::from_strings(1, 1.0, 0.0, {"u*u*u"}, {"0"}, {"10 + sin(x)"});
  CoupledGaussianState noise({{nullptr, 0, 7}}, 1, 0, 1.0, 0.0);
  auto s = make_trajectory(p, 16, nullptr, 0, 0.01, 0);
  double when = -1;
  try {
    for (int i = 0; i < 1000; ++i) {
      noise.evolve(0.01);
      step_approximate(s, p, noise);
    }
  } catch (const BlowUpError& e) {
    when = e.time;
  }
  CHECK(when > 0);
  CHECK(when < 1.0);
}

TEST_CASE("stopping monitor") {
  auto p = ProblemSpec::linear();
  auto s = make_trajectory(p, 16, nullptr, 0, 0.01, 0);
  auto m = monitor_stopping({s}, 0.0);
  REQUIRE(m.triggered_at);
  CHECK(*m.triggered_at == 0.0);
  auto quiet = monitor_stopping({s, s, s}, 1e6);
  CHECK_FALSE(quiet.triggered_at);

  // steepening deterministic Burgers: the trigger is the first grid time with max >= K
  auto b = ProblemSpec::from_strings(1, 0.05, 0.0, {"0"}, {"u"}, {"0.5 + sin(x)"});
  CoupledGaussianState noise({{nullptr, 0, 63}}, 1, 0, 0.05, 0.0);
  auto t = make_trajectory(b, 128, nullptr, 0, 1e-3, 0);
  std::vector<TrajectoryState> traj = {t};
  for (int i = 0; i < 600; ++i) {
    noise.evolve(1e-3);
    step_approximate(t, b, noise);
    if (i % 10 == 9) traj.push_back(t);
  }
  std::vector<double> sups;
  for (const auto& x : traj) sups.push_back(field_sup_norm(x.u, 8));
  double K = 0.5 * (sups.front() + *std::max_element(sups.begin(), sups.end()));
  auto mon = monitor_stopping(traj, K);
  size_t first = 0;
  while (first < sups.size() && field_sup_norm(traj[first].u) < K) ++first;
  if (first < traj.size()) {
    REQUIRE(mon.triggered_at);
    CHECK(*mon.triggered_at == doctest::Approx(traj[first].t));
  } else {
    CHECK_FALSE(mon.triggered_at);
  }
}

TEST_CASE("correction density: shape and off-diagonal mean zero") {
  auto fd = builtin_scheme("fd_forward");
  const double eps = 0.25;
  const int seeds = 40, lift = 256;
  double off = 0, off2 = 0;
  for (int sd = 0; sd < seeds; ++sd) {
    CoupledGaussianState st({{nullptr, 0, 127}, {&fd, eps, 127}}, 2, sd);
    auto H = correction_density(st, 1, fd, eps, lift, 0.4, 0.25);
    REQUIRE(H.H.size() == 4);
    CHECK(H.besov_norm > 0);
    CHECK(std::isfinite(H.besov_norm));
    double m = H.H[1].at(0, 0).real() / kSqrt2Pi / (2 * kPi);
    off += m;
    off2 += m * m;
  }
  double mean = off / seeds, sd = std::sqrt(off2 / seeds - mean * mean);
  CHECK(std::abs(mean) < 4 * sd / std::sqrt(double(seeds)));
}

}  // TEST_SUITE

#include <doctest.h>

#include <cmath>
#include <random>
#include <thread>

#include "roughspde/fourier.hpp"
#include "roughspde/scheme.hpp"

using namespace roughspde;

namespace {

std::vector<double> sample(const CircleGrid& g, const std::function<double(double)>& f) {
  std::vector<double> v(g.n_points());
  for (int j = 0; j < g.n_points(); ++j) v[j] = f(g.point(j));
  return v;
}

}  // namespace

TEST_SUITE("fourier") {

TEST_CASE("grid points start at -pi and are evenly spaced") {
  CircleGrid g(8);
  CHECK(g.point(0) == doctest::Approx(-kPi));
  CHECK(g.spacing() == doctest::Approx(kPi / 4));
  CHECK(g.kmax() == 3);
  CHECK_THROWS_AS(CircleGrid(7), ShapeError);
  CHECK_THROWS_AS(CircleGrid(2), ShapeError);
}

TEST_CASE("grid size for epsilon is the smallest even N >= 2 pi / eps") {
  CHECK(CircleGrid::for_epsilon(1.0 / 16) == 102);
  CHECK(CircleGrid::for_epsilon(1.0 / 32) == 202);
  CHECK(CircleGrid::for_epsilon(1.0 / 64) == 404);
  CHECK(CircleGrid::for_epsilon(1.0 / 128) == 806);
  CHECK(CircleGrid::for_epsilon(2 * kPi / 64) == 64);
}

TEST_CASE("constant field has u(0) = sqrt(2 pi) c") {
  CircleGrid g(16);
  std::vector<double> v(16, 3.0);
  auto u = transform(v, g);
  CHECK(u.at(0, 0).real() == doctest::Approx(kSqrt2Pi * 3.0));
  for (int k = 1; k <= 8; ++k) CHECK(std::abs(u.at(0, k)) < 1e-14);
}

TEST_CASE("single cosine lands on its mode with the unitary factor") {
  CircleGrid g(32);
  auto u = transform(sample(g, [](double x) { return std::cos(3 * x); }), g);
  CHECK(u.at(0, 3).real() == doctest::Approx(kSqrt2Pi / 2));
  CHECK(std::abs(u.at(0, 3).imag()) < 1e-13);
  auto s = transform(sample(g, [](double x) { return std::sin(5 * x); }), g);
  // sin(5x) = (e^{5ix} - e^{-5ix}) / 2i
  CHECK(s.at(0, 5).imag() == doctest::Approx(-kSqrt2Pi / 2));
}

TEST_CASE("transform round trip is exact to rounding") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> N;
  for (int n : {4, 6, 16, 102, 806}) {
    CircleGrid g(n);
    std::vector<double> v(2 * n);
    for (auto& x : v) x = N(rng);
    auto u = transform(v, g, 2);
    auto w = inverse_transform(u);
    for (size_t i = 0; i < v.size(); ++i) CHECK(w[i] == doctest::Approx(v[i]).epsilon(1e-12));
  }
}

TEST_CASE("Parseval holds in the unitary normalization") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> N;
  CircleGrid g(64);
  std::vector<double> v(64);
  for (auto& x : v) x = N(rng);
  auto u = transform(v, g);
  double phys = 0, spec = std::norm(u.at(0, 0)) + std::norm(u.at(0, 32));
  for (double x : v) phys += x * x * g.spacing();
  for (int k = 1; k < 32; ++k) spec += 2 * std::norm(u.at(0, k));
  CHECK(spec == doctest::Approx(phys).epsilon(1e-12));
}

TEST_CASE("eval reproduces a band-limited field off the grid") {
  CircleGrid g(32);
  auto f = [](double x) { return 0.5 + std::sin(2 * x) - 0.25 * std::cos(7 * x); };
  auto u = transform(sample(g, f), g);
  for (double x : {-3.0, -0.3, 0.1, 1.7, 3.1}) CHECK(u.eval(0, x) == doctest::Approx(f(x)).epsilon(1e-12));
}

TEST_CASE("resample pads and truncates spectrally") {
  CircleGrid g(16), G(48);
  auto f = [](double x) { return std::sin(x) + std::cos(4 * x); };
  auto up = resample(transform(sample(g, f), g), 48);
  auto vals = inverse_transform(up);
  for (int j = 0; j < 48; ++j) CHECK(vals[j] == doctest::Approx(f(G.point(j))).epsilon(1e-12));
  auto down = resample(up, 16);
  auto back = inverse_transform(down);
  for (int j = 0; j < 16; ++j) CHECK(back[j] == doctest::Approx(f(g.point(j))).epsilon(1e-12));
  CHECK(std::abs(up.at(0, 24)) == 0.0);
}

TEST_CASE("padded size is even and at least 3N/2") {
  for (int n : {4, 6, 10, 102, 806, 1610}) {
    int m = padded_size(n);
    CHECK(m % 2 == 0);
    CHECK(2 * m >= 3 * n);
    CHECK(2 * (m - 2) < 3 * n);
  }
}

TEST_CASE("exact derivative and Laplacian multipliers") {
  CircleGrid g(32);
  auto u = transform(sample(g, [](double x) { return std::sin(2 * x); }), g);
  auto du = inverse_transform(apply_multiplier(MultiplierOperator::exact_derivative(), u));
  auto lu = inverse_transform(apply_multiplier(MultiplierOperator::exact_laplacian(), u));
  for (int j = 0; j < 32; ++j) {
    double x = g.point(j);
    CHECK(du[j] == doctest::Approx(2 * std::cos(2 * x)).epsilon(1e-12));
    CHECK(lu[j] == doctest::Approx(-4 * std::sin(2 * x)).epsilon(1e-12));
  }
}

TEST_CASE("shift multiplier translates the field") {
  CircleGrid g(32);
  auto f = [](double x) { return std::cos(x) + std::sin(3 * x); };
  auto u = transform(sample(g, f), g);
  auto s = apply_multiplier(MultiplierOperator::shift(0.3), u);
  for (double x : {-1.0, 0.5, 2.0}) CHECK(s.eval(0, x) == doctest::Approx(f(x + 0.3)).epsilon(1e-12));
}

TEST_CASE("physical-space difference operator matches the atom-sum symbol") {
  CircleGrid g(64);
  auto f = [](double x) { return std::exp(std::sin(x)); };
  auto u = transform(sample(g, f), g);
  auto fwd = builtin_scheme("forward");
  const double eps = g.spacing();
  auto d = inverse_transform(apply_derivative_physical(u, fwd.mu, eps));
  auto spec = inverse_transform(apply_multiplier(derivative_operator(fwd, eps), u));
  for (int j = 0; j < 64; ++j) {
    double x = g.point(j);
    // on the grid the shift by one spacing is exact: plain forward difference
    CHECK(d[j] == doctest::Approx((f(x + eps) - f(x)) / eps).epsilon(1e-10));
    CHECK(spec[j] == doctest::Approx(d[j]).epsilon(1e-10));
  }
}

TEST_CASE("heat semigroup decays each mode by exp(-t k^2 m)") {
  CircleGrid g(32);
  auto u = transform(sample(g, [](double x) { return std::sin(3 * x); }), g);
  auto v = heat_semigroup(0.1, u);
  CHECK(std::abs(v.at(0, 3)) == doctest::Approx(std::abs(u.at(0, 3)) * std::exp(-0.9)));
  auto fd = builtin_scheme("fd_forward");
  double eps = 0.2;
  auto w = heat_semigroup(0.1, u, &fd, eps);
  double m = std::pow(std::sin(0.3) / 0.3, 2);
  CHECK(std::abs(w.at(0, 3)) == doctest::Approx(std::abs(u.at(0, 3)) * std::exp(-0.9 * m)));
  auto same = heat_semigroup(0.0, u);
  for (int k = 0; k < 16; ++k) CHECK(same.at(0, k) == u.at(0, k));
  CHECK_THROWS_AS(heat_semigroup(-1.0, u), std::invalid_argument);
}

TEST_CASE("shape errors are reported") {
  CircleGrid g(8);
  std::vector<double> v(7);
  CHECK_THROWS_AS(transform(v, g), ShapeError);
  SpectralField a(8), b(16);
  CHECK_THROWS_AS(a += b, ShapeError);
}

TEST_CASE("concurrent transforms agree with serial ones") {
  CircleGrid g(96);
  std::vector<double> v(96);
  for (int j = 0; j < 96; ++j) v[j] = std::sin(j * 0.37) + 0.1 * j;
  auto ref = transform(v, g);
  std::vector<std::thread> th;
  std::vector<int> ok(4, 1);
  for (int t = 0; t < 4; ++t)
    th.emplace_back([&, t] {
      for (int r = 0; r < 50; ++r) {
        auto u = transform(v, g);
        for (int k = 0; k <= 48; ++k)
          if (u.at(0, k) != ref.at(0, k)) ok[t] = 0;
      }
    });
  for (auto& t : th) t.join();
  for (int x : ok) CHECK(x == 1);
}

}  // TEST_SUITE

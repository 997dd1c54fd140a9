#include <doctest.h>

#include <cmath>
#include <random>

#include "roughspde/rough.hpp"

using namespace roughspde;

namespace {

GridRoughPath random_smooth_path(std::mt19937_64& rng, int pts, int n, int p) {
  std::normal_distribution<double> N;
  std::vector<double> t(pts), x(static_cast<size_t>(pts) * n);
  std::vector<double> a(3 * n), f(3 * n);
  for (auto& v : a) v = N(rng);
  for (auto& v : f) v = 1 + 2 * std::abs(N(rng));
  for (int i = 0; i < pts; ++i) {
    t[i] = double(i) / (pts - 1);
    for (int c = 0; c < n; ++c) {
      double v = 0;
      for (int m = 0; m < 3; ++m) v += a[3 * c + m] * std::sin(f[3 * c + m] * t[i] + m);
      x[static_cast<size_t>(i) * n + c] = v;
    }
  }
  return GridRoughPath(t, x, n, p);
}

}  // namespace

TEST_SUITE("rough") {

TEST_CASE("shuffle of ab and ac") {
  auto s = shuffle(Word::from_alpha("ab"), Word::from_alpha("ac"));
  std::map<std::string, long long> got;
  for (const auto& [w, m] : s) got[w.alpha_str()] = m;
  std::map<std::string, long long> expect = {{"abac", 1}, {"aabc", 2}, {"aacb", 2}, {"acab", 1}};
  CHECK(got == expect);
}

TEST_CASE("shuffle edge cases") {
  auto e = shuffle(Word{}, Word{0, 1});
  REQUIRE(e.size() == 1);
  CHECK(e.begin()->first == Word{0, 1});
  auto aa = shuffle(Word{0}, Word{0});
  CHECK(aa.at(Word{0, 0}) == 2);
  long long total = 0;
  for (const auto& [w, m] : shuffle(Word{0, 1, 2}, Word{3, 4})) total += m;
  CHECK(total == 10);  // binomial(5, 2)
  CHECK(shuffle(Word{0, 1}, Word{2}, 2).empty());
}

TEST_CASE("word printing and ordering") {
  CHECK(Word{0, 1}.str() == "1.2");
  CHECK(Word{}.str() == "-");
  CHECK(Word::from_alpha("cab").letters == std::vector<int>{2, 0, 1});
  CHECK(words_of_length(3, 2).size() == 9);
  CHECK(words_of_length(2, 0).size() == 1);
  CHECK(TensorElement::index(Word{1, 0}, 2) == 2);
}

TEST_CASE("chord signature of a one-dimensional step is exp") {
  std::vector<double> d = {0.7};
  auto g = TensorElement::chord(d, 5);
  double f = 1;
  for (int L = 0; L <= 5; ++L) {
    if (L) f *= L;
    CHECK(g[Word(std::vector<int>(L, 0))] == doctest::Approx(std::pow(0.7, L) / f));
  }
}

TEST_CASE("Chen product is associative with identity and antipode inverse") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N;
  auto rnd = [&] {
    std::vector<double> d = {N(rng), N(rng)};
    return TensorElement::chord(d, 4);
  };
  auto a = rnd() * rnd(), b = rnd(), c = rnd() * rnd() * rnd();
  CHECK(max_abs_diff((a * b) * c, a * (b * c)) < 1e-12);
  auto id = TensorElement::identity(2, 4);
  CHECK(max_abs_diff(a * id, a) == 0);
  CHECK(max_abs_diff(a * a.inverse(), id) < 1e-12);
  CHECK(max_abs_diff(a.inverse() * a, id) < 1e-12);
  CHECK(shuffle_defect(a * b * c) < 1e-10);
  CHECK_THROWS_AS(chen_compose(a, TensorElement::identity(2, 3)), std::invalid_argument);
  CHECK(a.restrict_to(2).level_cap() == 2);
  CHECK(a.restrict_to(2)[Word{0, 1}] == a[Word{0, 1}]);
}

TEST_CASE("non-group elements fail the shuffle identity") {
  auto g = TensorElement::identity(2, 2);
  g[Word{0}] = 1.0;
  g[Word{0, 0}] = 0.1;  // should be 1/2
  CHECK(shuffle_defect(g) > 0.5);
}

TEST_CASE("grid increments compose and match brute-force step products") {
  std::mt19937_64 rng(5);
  auto rp = random_smooth_path(rng, 37, 2, 3);
  auto brute = TensorElement::identity(2, 3);
  for (int i = 4; i < 29; ++i) brute = brute * rp.one_step(i);
  CHECK(max_abs_diff(rp.increment(4, 29), brute) < 1e-13);
  CHECK(max_abs_diff(rp.increment(4, 17) * rp.increment(17, 29), rp.increment(4, 29)) < 1e-13);
  CHECK(max_abs_diff(rp.increment(29, 4) * rp.increment(4, 29), TensorElement::identity(2, 3)) < 1e-12);
  CHECK(integration_by_parts_check(rp, 0, 1, 3, 30) < 1e-12);
}

TEST_CASE("off-grid increments use partial chords") {
  std::mt19937_64 rng(8);
  auto rp = random_smooth_path(rng, 21, 2, 3);
  double a = 0.123, b = 0.456, c = 0.871;
  CHECK(max_abs_diff(rp.increment_at(a, b) * rp.increment_at(b, c), rp.increment_at(a, c)) < 1e-13);
  CHECK(max_abs_diff(rp.increment_at(rp.param(2), rp.param(9)), rp.increment(2, 9)) < 1e-13);
  auto v = rp.value_at(b);
  auto x = rp.increment_at(rp.param(0), b);
  CHECK(v[1] - rp.value(0, 1) == doctest::Approx(x[Word{1}]));
  CHECK_THROWS_AS(rp.increment_at(-0.5, 0.2), std::out_of_range);
}

TEST_CASE("periodic lift wraps around the circle") {
  const int N = 64;
  std::vector<double> f(2 * N);
  CircleGrid g(N);
  for (int j = 0; j < N; ++j) {
    f[j] = std::cos(g.point(j));
    f[N + j] = std::sin(2 * g.point(j));
  }
  auto rp = GridRoughPath::from_field(f, 2, 2);
  CHECK(rp.periodic());
  // a full loop has zero level-1 increment
  auto loop = rp.increment_at(0.3, 0.3 + 2 * kPi);
  CHECK(std::abs(loop[Word{0}]) < 1e-13);
  CHECK(std::abs(loop[Word{1}]) < 1e-13);
  auto wrap = rp.increment_at(3.0, 3.5);
  auto parts = rp.increment_at(3.0, kPi) * rp.increment_at(-kPi, 3.5 - 2 * kPi);
  CHECK(max_abs_diff(wrap, parts) < 1e-13);
}

TEST_CASE("circle level-2 area is pi") {
  const int M = 20000;
  std::vector<double> t(M + 1), x(2 * (M + 1));
  for (int i = 0; i <= M; ++i) {
    t[i] = 2 * kPi * i / M;
    x[2 * i] = std::cos(t[i]);
    x[2 * i + 1] = std::sin(t[i]);
  }
  GridRoughPath rp(t, x, 2, 2);
  auto s = rp.increment(0, M);
  double area = 0.5 * (s[Word{0, 1}] - s[Word{1, 0}]);
  // polygon area M/2 sin(2 pi / M) differs from pi by about 5e-8 here
  CHECK(std::abs(area - kPi) < 1e-6);
}

TEST_CASE("level-one D_eps of the lift is the finite difference of the path") {
  const int N = 128;
  CircleGrid g(N);
  std::vector<double> f(N);
  for (int j = 0; j < N; ++j) f[j] = std::sin(g.point(j)) + 0.3 * std::cos(3 * g.point(j));
  auto rp = GridRoughPath::from_field(f, 1, 2);
  auto mu = builtin_scheme("forward").mu;
  const double eps = 4 * g.spacing();
  auto d = d_eps_rough_values(rp, mu, eps, Word{0});
  auto d2 = d_eps_rough_values(rp, mu, eps, Word{0, 0});
  for (int j = 0; j < N; ++j) {
    double inc = f[(j + 4) % N] - f[j];
    CHECK(d[j] == doctest::Approx(inc / eps).epsilon(1e-12));
    CHECK(d2[j] == doctest::Approx(inc * inc / 2 / eps).epsilon(1e-12));
  }
  CHECK_THROWS_AS(d_eps_rough_values(rp, mu, g.spacing() / 2, Word{0}), ResolutionError);
  auto spec = d_eps_rough(rp, mu, eps, Word{0});
  CHECK(spec.n_points() == N);
}

TEST_CASE("rough integral of the constant 1 is the path increment") {
  std::mt19937_64 rng(2);
  auto rp = std::make_shared<GridRoughPath>(random_smooth_path(rng, 50, 2, 2));
  ControlledPath one(rp, 1);
  for (int i = 0; i < rp->points(); ++i) one.set(i, Word{}, 1.0);
  CHECK(one.get(0, Word{}) == 1.0);
  CHECK(one.get(0, Word{1}) == 0.0);
  CHECK(rough_integral(one, *rp, 1, 5, 40) == doctest::Approx(rp->value(40, 1) - rp->value(5, 1)));
  CHECK_THROWS_AS(one.set(0, Word{0, 1}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(rough_integral(one, *rp, 0, 10, 5), std::out_of_range);
}

TEST_CASE("gradient chain rule is exact for polynomials of degree <= p") {
  std::mt19937_64 rng(4);
  const int p = 3;
  auto rp = std::make_shared<GridRoughPath>(random_smooth_path(rng, 40, 2, p));
  // cal G(x) = x1^2 x2 + x2^3 / 3; Y_i = d_i cal G with derivatives as coefficients
  auto grad = [](double a, double b, int i, const Word& w) -> double {
    std::vector<int> c = {0, 0};
    c[i]++;
    for (int l : w.letters) c[l]++;
    // partial derivatives of x1^2 x2 + x2^3/3 by multi-index (c0, c1)
    auto mono = [](int e, int k, double x) {
      double r = 1;
      for (int j = 0; j < k; ++j) r *= (e - j);
      return k > e ? 0.0 : r * std::pow(x, e - k);
    };
    return mono(2, c[0], a) * mono(1, c[1], b) + (c[0] == 0 ? mono(3, c[1], b) / 3 : 0.0);
  };
  std::vector<ControlledPath> Y;
  for (int i = 0; i < 2; ++i) {
    Y.emplace_back(rp, p - 1);
    for (int x = 0; x < rp->points(); ++x)
      for (int L = 0; L < p; ++L)
        for (const auto& w : words_of_length(2, L)) Y[i].set(x, w, grad(rp->value(x, 0), rp->value(x, 1), i, w));
  }
  auto G = [&](int x) {
    double a = rp->value(x, 0), b = rp->value(x, 1);
    return a * a * b + b * b * b / 3;
  };
  double I = rough_integral(Y[0], *rp, 0, 3, 35) + rough_integral(Y[1], *rp, 1, 3, 35);
  CHECK(I == doctest::Approx(G(35) - G(3)).epsilon(1e-12));
}

TEST_CASE("controlled G carries the derivatives of G") {
  std::mt19937_64 rng(6);
  auto rp = std::make_shared<GridRoughPath>(random_smooth_path(rng, 10, 2, 3));
  SmoothMatrixFunction G;
  G.n = 2;
  G.max_order = 2;
  G.deriv = [](std::span<const double> u, int i, int j, const Word& w) {
    // G_ij(u) = u_i u_j
    double v[2] = {u[0], u[1]};
    if (w.empty()) return v[i] * v[j];
    if (w.size() == 1) return (w.letters[0] == i ? v[j] : 0.0) + (w.letters[0] == j ? v[i] : 0.0);
    Word a{i, j}, b{j, i};
    return (w == a ? 1.0 : 0.0) + (w == b ? 1.0 : 0.0);
  };
  auto Y = build_controlled_G(*rp, rp, G, 3);
  REQUIRE(Y.size() == 4);
  const double a = rp->value(4, 0), b = rp->value(4, 1);
  CHECK(Y[1].get(4, Word{}) == doctest::Approx(a * b));
  CHECK(Y[1].get(4, Word{0}) == doctest::Approx(b));
  CHECK(Y[0].get(4, Word{0}) == doctest::Approx(2 * a));
  CHECK(Y[0].get(4, Word{0, 0}) == doctest::Approx(2.0));
  CHECK(Y[1].get(4, Word{0, 1}) == doctest::Approx(1.0));
  G.max_order = 1;
  CHECK_THROWS_AS(build_controlled_G(*rp, rp, G, 3), std::invalid_argument);
}

TEST_CASE("dyadic rough distance") {
  const int N = 64;
  CircleGrid g(N);
  std::vector<double> f(N), h(N);
  for (int j = 0; j < N; ++j) {
    f[j] = std::sin(g.point(j));
    h[j] = f[j] + 0.01 * std::cos(5 * g.point(j));
  }
  auto a = GridRoughPath::from_field(f, 1, 2), b = GridRoughPath::from_field(h, 1, 2);
  CHECK(rough_distance_dyadic(a, a, 0.4) == 0);
  double d = rough_distance_dyadic(a, b, 0.4);
  CHECK(d > 0);
  // level one over one step is a lower bound
  double one = 0;
  for (int j = 0; j < N; ++j)
    one = std::max(one, std::abs((h[(j + 1) % N] - h[j]) - (f[(j + 1) % N] - f[j])) / std::pow(g.spacing(), 0.4));
  CHECK(d >= one * (1 - 1e-12));
}

}  // TEST_SUITE

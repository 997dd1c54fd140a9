#include "roughspde/scheme.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>

namespace roughspde {

double SignedAtomicMeasure::mass() const {
  double s = 0.0;
  for (const auto& a : atoms) s += a.c;
  return s;
}

double SignedAtomicMeasure::moment(int q) const {
  double s = 0.0;
  for (const auto& a : atoms) s += a.c * std::pow(a.y, q);
  return s;
}

cplx SignedAtomicMeasure::fourier(double x) const {
  cplx s = 0.0;
  for (const auto& a : atoms) s += a.c * std::polar(1.0, x * a.y);
  return s;
}

namespace {

double sinc_half_sq(double x) {
  double y = 0.5 * x;
  if (std::abs(y) < 1e-4) return 1.0 - y * y / 3.0;
  double s = std::sin(y) / y;
  return s * s;
}

// symbol of the standard three-point Laplacian at grid spacing eps, carried
// only on the band |x| <= pi that a grid of that spacing resolves
double fd_m(double x) { return std::abs(x) <= kPi ? sinc_half_sq(x) : INFINITY; }
double fd_h(double x) { return std::abs(x) <= kPi ? 1.0 : 0.0; }
double one(double) { return 1.0; }

SignedAtomicMeasure forward_mu() { return {{{1.0, 1.0}, {0.0, -1.0}}}; }
SignedAtomicMeasure backward_mu() { return {{{0.0, 1.0}, {-1.0, -1.0}}}; }
SignedAtomicMeasure central_mu() { return {{{1.0, 0.5}, {-1.0, -0.5}}}; }

}  // namespace

SchemeSpec builtin_scheme(const std::string& name) {
  SchemeSpec s;
  s.name = name;
  bool fd = name.rfind("fd_", 0) == 0;
  std::string base = fd ? name.substr(3) : name;
  if (fd) {
    s.m = fd_m;
    s.h = fd_h;
    s.c_m = 0.4;
    s.breakpoints = {kPi};
    s.m_src = "@fd";
    s.h_src = "@cutoff";
  } else {
    s.m = one;
    s.h = one;
    s.c_m = 0.5;
  }
  if (base == "forward") s.mu = forward_mu();
  else if (base == "backward") s.mu = backward_mu();
  else if (base == "central") s.mu = central_mu();
  else if (base == "exact" && !fd) {
    s.mu = central_mu();  // carried for moment checks only
    s.exact_derivative = true;
  } else {
    throw std::invalid_argument("unknown builtin scheme '" + name + "'");
  }
  return s;
}

std::vector<std::string> builtin_scheme_names() {
  return {"forward", "backward", "central", "exact", "fd_forward", "fd_backward", "fd_central"};
}

Symbols multiplier_symbols(const SchemeSpec& spec, double epsilon, int k) {
  if (k == 0) return {0.0, 0.0, spec.h(0.0)};
  if (!(epsilon > 0) && !spec.exact_derivative) throw std::invalid_argument("epsilon must be positive");
  const double x = epsilon * k;
  double m = spec.m(x);
  if (!(m > 0)) throw SchemeDomainError(spec.name + ": m(" + std::to_string(x) + ") is not positive");
  Symbols s;
  s.laplacian = std::isfinite(m) ? -double(k) * k * m : -INFINITY;
  s.derivative = spec.exact_derivative ? cplx(0.0, double(k)) : spec.mu.fourier(x) / epsilon;
  s.noise = spec.h(x);
  return s;
}

MultiplierOperator laplacian_operator(const SchemeSpec& spec, double epsilon) {
  return {MultiplierKind::laplacian, [spec, epsilon](int k) { return cplx(multiplier_symbols(spec, epsilon, k).laplacian); },
          epsilon};
}

MultiplierOperator derivative_operator(const SchemeSpec& spec, double epsilon) {
  return {MultiplierKind::derivative, [spec, epsilon](int k) { return multiplier_symbols(spec, epsilon, k).derivative; },
          epsilon};
}

MultiplierOperator noise_filter_operator(const SchemeSpec& spec, double epsilon) {
  return {MultiplierKind::noise_filter, [spec, epsilon](int k) { return cplx(multiplier_symbols(spec, epsilon, k).noise); },
          epsilon};
}

// ---------------------------------------------------------------- validation

namespace {

struct Rational {
  long long num = 0, den = 1;
};

// exact reconstruction of a double as p/q with q <= 2^20, if it is one
std::optional<Rational> as_rational(double v) {
  for (long long q = 1; q <= (1LL << 20); q *= 2) {
    for (long long d : {q, 3 * q, 5 * q, 7 * q, 9 * q}) {
      double p = v * d;
      if (std::abs(p) < 9e15 && p == std::nearbyint(p) && static_cast<double>(std::llround(p)) / d == v)
        return Rational{std::llround(p), d};
    }
  }
  return std::nullopt;
}

__int128 gcd128(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    __int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

// sum of products of rationals, exactly, or nullopt on overflow or non-rational input
std::optional<Rational> exact_sum(const std::vector<std::pair<double, double>>& terms) {
  __int128 num = 0, den = 1;
  const __int128 cap = __int128(1) << 90;
  for (auto [a, b] : terms) {
    auto ra = as_rational(a), rb = as_rational(b);
    if (!ra || !rb) return std::nullopt;
    __int128 n = static_cast<__int128>(ra->num) * rb->num;
    __int128 d = static_cast<__int128>(ra->den) * rb->den;
    num = num * d + n * den;
    den = den * d;
    __int128 g = gcd128(num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
    if (den > cap || num > cap || -num > cap) return std::nullopt;
  }
  if (num == 0) return Rational{0, 1};
  __int128 g = gcd128(num, den);
  num /= g;
  den /= g;
  if (den > (__int128(1) << 62) || num > (__int128(1) << 62) || -num > (__int128(1) << 62)) return std::nullopt;
  return Rational{static_cast<long long>(num), static_cast<long long>(den)};
}

double total_variation(const std::function<double(double)>& f, double a, double b, int n) {
  double tv = 0.0, prev = f(a);
  for (int i = 1; i <= n; ++i) {
    double v = f(a + (b - a) * i / n);
    tv += std::abs(v - prev);
    prev = v;
  }
  return tv;
}

}  // namespace

bool ValidationReport::ok() const {
  for (const auto& c : clauses)
    if (!c.pass) return false;
  return true;
}

std::string ValidationReport::to_text() const {
  std::ostringstream os;
  os.precision(6);
  os << "scheme " << scheme << "\n";
  for (const auto& c : clauses)
    os << "  [" << (c.pass ? "pass" : "FAIL") << "] " << c.clause << ": measured " << c.measured << ", tol "
       << c.tolerance << (c.detail.empty() ? "" : "  (" + c.detail + ")") << "\n";
  os << "  b_t total variation: max " << bv_estimate << (bv_suspicious ? " (growing: suspicious)" : " (bounded on sample)")
     << "\n";
  return os.str();
}

ValidationReport validate_scheme(const SchemeSpec& spec) {
  ValidationReport r;
  r.scheme = spec.name;
  auto add = [&](std::string name, bool pass, double measured, double tol, std::string detail = {}) {
    r.clauses.push_back({std::move(name), pass, measured, tol, std::move(detail)});
  };

  // symmetric sample grid, avoiding the exact breakpoints
  std::vector<double> xs;
  for (int i = 1; i <= 4000; ++i) xs.push_back(50.0 * i / 4000.0 * (1.0 + 1e-7));
  double m_odd = 0, h_odd = 0, m_min = INFINITY, h_max = 0;
  bool m_pos = true;
  for (double x : xs) {
    double mp = spec.m(x), mn = spec.m(-x), hp = spec.h(x), hn = spec.h(-x);
    if (std::isfinite(mp) || std::isfinite(mn)) m_odd = std::max(m_odd, std::abs(mp - mn));
    h_odd = std::max(h_odd, std::abs(hp - hn));
    if (!(mp > 0) || !(mn > 0)) m_pos = false;
    m_min = std::min({m_min, mp, mn});
    h_max = std::max({h_max, std::abs(hp), std::abs(hn)});
  }
  add("m_even", m_odd <= 1e-12, m_odd, 1e-12);
  add("m_positive", m_pos, m_min, 0.0);
  add("m_at_zero", std::abs(spec.m(0.0) - 1.0) <= 1e-12, spec.m(0.0), 1e-12);
  add("c_m_range", spec.c_m > 0 && spec.c_m < 1, spec.c_m, 0.0, "c_m must lie in (0,1)");
  add("m_lower_bound", m_min >= spec.c_m, m_min, spec.c_m, "min of m over |x| <= 50");
  add("h_even", h_odd <= 1e-12, h_odd, 1e-12);
  add("h_at_zero", std::abs(spec.h(0.0) - 1.0) <= 1e-12, spec.h(0.0), 1e-12);
  const double step = 1e-4;
  double hprime = (spec.h(step) - spec.h(-step)) / (2 * step);
  add("h_prime_zero", std::abs(hprime) <= 1e-6, std::abs(hprime), 1e-6, "centered difference, step 1e-4");
  add("h_bounded", std::isfinite(h_max), h_max, 0.0);

  const auto& atoms = spec.mu.atoms;
  add("mu_atoms", atoms.size() >= 2, double(atoms.size()), 2.0);
  std::vector<std::pair<double, double>> mass_terms, moment_terms;
  for (const auto& a : atoms) {
    mass_terms.push_back({a.c, 1.0});
    moment_terms.push_back({a.c, a.y});
  }
  bool finite_atoms = true;
  for (const auto& a : atoms) finite_atoms = finite_atoms && std::isfinite(a.c) && std::isfinite(a.y);
  add("mu_finite", finite_atoms, double(atoms.size()), 0.0, "sum |c||y|^q finite for finitely many finite atoms");
  auto mass = exact_sum(mass_terms);
  if (mass) add("mu_mass_zero", mass->num == 0, double(mass->num) / mass->den, 0.0, "exact rational");
  else add("mu_mass_zero", std::abs(spec.mu.mass()) <= 1e-12, spec.mu.mass(), 1e-12);
  auto mom = exact_sum(moment_terms);
  if (mom) add("mu_first_moment_one", mom->num == mom->den, double(mom->num) / mom->den, 0.0, "exact rational");
  else add("mu_first_moment_one", std::abs(spec.mu.moment(1) - 1.0) <= 1e-12, spec.mu.moment(1), 1e-12);

  // b_t(x) = exp(-x^2 m(x) t): variation on a window that covers its decay
  for (int i = 0; i <= 12; ++i) {
    double t = std::pow(10.0, -3.0 + 0.5 * i);
    double xmax = std::max(10.0, std::sqrt(60.0 / (t * std::max(spec.c_m, 1e-3))));
    auto b = [&](double x) {
      double m = spec.m(x);
      return std::isfinite(m) ? std::exp(-x * x * m * t) : 0.0;
    };
    r.bv_t.push_back(t);
    r.bv_values.push_back(total_variation(b, -xmax, xmax, 40000));
  }
  r.bv_estimate = *std::max_element(r.bv_values.begin(), r.bv_values.end());
  int rising = 0;
  for (size_t i = 1; i < r.bv_values.size(); ++i) rising += r.bv_values[i] > r.bv_values[i - 1] * (1 + 1e-3);
  r.bv_suspicious = r.bv_values.back() > 1.5 * r.bv_values.front() || rising > 6;
  add("b_t_bounded_variation", !r.bv_suspicious, r.bv_estimate, 0.0, "sampled; flags growth, never certifies");
  return r;
}

// ---------------------------------------------------------------- Lambda

namespace {

// sum_j c_j (1 - cos(y_j t)) / t^2, in the cancellation-free form 2 sin^2(y t / 2)
double atom_kernel(const SignedAtomicMeasure& mu, double t) {
  double s = 0.0;
  for (const auto& a : mu.atoms) {
    double v = std::sin(0.5 * a.y * t);
    s += a.c * 2.0 * v * v;
  }
  return s / (t * t);
}

double weight(const SchemeSpec& spec, double t) {
  double m = spec.m(t);
  if (!std::isfinite(m)) return 0.0;
  double h = spec.h(t);
  return h * h / m;
}

}  // namespace

LambdaResult compute_lambda(const SchemeSpec& spec, double nu, double sigma, const QuadratureParams& q) {
  if (!(nu > 0)) throw std::invalid_argument("nu must be positive");
  if (sigma < 0) throw std::invalid_argument("sigma must be non-negative");
  LambdaResult res;
  if (sigma == 0.0) return res;
  const double pref = sigma * sigma / (2.0 * kPi * nu);
  const auto& mu = spec.mu;
  if (spec.exact_derivative) return res;  // no finite-difference commutator: g == 1

  // (0, delta]: Taylor expansion of 1 - cos, weight frozen at t = 0
  double m2 = 0, m4 = 0;
  for (const auto& a : mu.atoms) {
    m2 += a.c * a.y * a.y;
    m4 += a.c * a.y * a.y * a.y * a.y;
  }
  double w0 = weight(spec, 0.0);
  double d = q.delta;
  double head = w0 * (0.5 * m2 * d - m4 * d * d * d / 72.0);
  double head_err = std::abs(w0) * std::abs(m4) * d * d * d / 72.0 + std::abs(head) * 1e-6;

  // panels: decades, breakpoints and the period of the fastest atom
  std::vector<double> cuts = {d};
  double ymax = 0;
  for (const auto& a : mu.atoms) ymax = std::max(ymax, std::abs(a.y));
  double period = ymax > 0 ? 2 * kPi / ymax : q.t_max;
  for (double t = 1.0; t < q.t_max; t *= 10.0) cuts.push_back(t);
  for (double b : spec.breakpoints)
    if (b > d && b < q.t_max) cuts.push_back(b);
  cuts.push_back(q.t_max);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  auto f = [&](double t) { return atom_kernel(mu, t) * weight(spec, t); };
  double body = 0, body_err = 0;
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    double a = cuts[i], b = cuts[i + 1];
    int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / (4 * period))));
    for (int p = 0; p < pieces; ++p) {
      double lo = a + (b - a) * p / pieces, hi = a + (b - a) * (p + 1) / pieces;
      double err = 0;
      body += GK::integrate(f, lo, hi, q.max_depth, q.tol, &err);
      body_err += err;
    }
  }

  // tail beyond t_max: weight must be locally flat (analytic tail) or vanish
  const double T = q.t_max;
  double wT = weight(spec, T), w2 = weight(spec, 2 * T), w4 = weight(spec, 4 * T);
  double tail = 0, tail_err = 0;
  if (wT != 0 || w2 != 0 || w4 != 0) {
    // integrand envelope ~ w(t)/t^2 must decay: w growing like t means no convergence
    if (std::abs(w4) > 3.5 * std::abs(wT)) {
      std::ostringstream os;
      os << "non-integrable tail for scheme " << spec.name << ": h^2/m grows from " << wT << " at t=" << T << " to "
         << w4 << " at t=" << 4 * T;
      throw QuadratureError(os.str());
    }
    // int_T^inf c (1 - cos(y t))/t^2 = c/T - c int_T^inf cos(yt)/t^2, the latter ~ -sin(yT)/(y T^2)
    for (const auto& a : mu.atoms) {
      if (a.y == 0) continue;
      double y = std::abs(a.y);
      tail += a.c * (1.0 / T + std::sin(y * T) / (y * T * T) - 2 * std::cos(y * T) / (y * y * T * T * T));
    }
    tail *= wT;
    tail_err = std::abs(w2 - wT) / T + 6.0 * std::abs(wT) / (T * T * T);
  }
  res.value = pref * (head + body + tail);
  res.tail = pref * tail;
  res.error_estimate = pref * (head_err + body_err + tail_err);
  return res;
}

}  // namespace roughspde

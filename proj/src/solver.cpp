#include "roughspde/solver.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "roughspde/norms.hpp"

namespace roughspde {

std::vector<std::string> ProblemSpec::variable_names(int n) {
  if (n == 1) return {"u", "u1"};
  std::vector<std::string> v;
  for (int i = 1; i <= n; ++i) v.push_back("u" + std::to_string(i));
  return v;
}

ProblemSpec ProblemSpec::from_strings(int n, double nu, double sigma, const std::vector<std::string>& F,
                                      const std::vector<std::string>& G, const std::vector<std::string>& initial) {
  if (n < 1) throw std::invalid_argument("problem dimension must be >= 1");
  if (!(nu > 0) || sigma < 0) throw std::invalid_argument("need nu > 0 and sigma >= 0");
  if (F.size() != static_cast<size_t>(n)) throw std::invalid_argument("F needs n entries");
  if (G.size() != static_cast<size_t>(n) * n) throw std::invalid_argument("G needs n*n entries");
  if (initial.size() != static_cast<size_t>(n)) throw std::invalid_argument("initial data needs n entries");
  ProblemSpec p;
  p.n = n;
  p.nu = nu;
  p.sigma = sigma;
  auto vars = variable_names(n);
  for (const auto& s : F) p.F.push_back(Expr::parse(s, vars));
  for (const auto& s : G) p.G.push_back(Expr::parse(s, vars));
  for (const auto& s : initial) p.initial.push_back(Expr::parse(s, {"x"}));
  for (const auto* list : {&F, &G, &initial})
    for (const auto& s : *list) p.sources.push_back(s);
  return p;
}

ProblemSpec ProblemSpec::burgers(double nu, double sigma) { return from_strings(1, nu, sigma, {"0"}, {"u"}, {"sin(x)"}); }

ProblemSpec ProblemSpec::linear(double nu, double sigma) { return from_strings(1, nu, sigma, {"0"}, {"0"}, {"sin(x)"}); }

namespace {

// derivative in component j; for n = 1 the aliases u and u1 both count
Expr diff_component(const Expr& e, int j, int n) {
  if (n != 1) return e.diff(j);
  Expr a = e.diff(0), b = e.diff(1);
  double c;
  if (b.is_constant(&c) && c == 0.0) return a;
  if (a.is_constant(&c) && c == 0.0) return b;
  return Expr::parse("(" + a.str() + ")+(" + b.str() + ")", ProblemSpec::variable_names(1));
}

bool all_zero(const std::vector<Expr>& v) {
  for (const auto& e : v) {
    double c;
    if (!e.is_constant(&c) || c != 0.0) return false;
  }
  return true;
}
}  // namespace

bool ProblemSpec::has_F() const { return !all_zero(F); }
bool ProblemSpec::has_G() const { return !all_zero(G); }

std::vector<Expr> ProblemSpec::div_G() const {
  std::vector<Expr> d;
  for (int i = 0; i < n; ++i) {
    // sum_j dG_ij/du_j, folded into one expression through the text form
    std::string s = "0";
    for (int j = 0; j < n; ++j) s += "+(" + diff_component(G[i * n + j], j, n).str() + ")";
    d.push_back(Expr::parse(s, variable_names(n)));
  }
  return d;
}

SmoothMatrixFunction ProblemSpec::G_function(int max_order) const {
  struct Cache {
    std::map<std::pair<int, Word>, Expr> d;
    std::mutex mu;
  };
  auto cache = std::make_shared<Cache>();
  auto G_copy = G;
  const int nn = n;
  SmoothMatrixFunction f;
  f.n = n;
  f.max_order = max_order;
  f.deriv = [cache, G_copy, nn, max_order](std::span<const double> u, int i, int j, const Word& w) {
    if (static_cast<int>(w.size()) > max_order) throw std::invalid_argument("derivative order beyond max_order");
    const Expr* e;
    {
      std::lock_guard<std::mutex> lock(cache->mu);
      auto key = std::make_pair(i * nn + j, w);
      auto it = cache->d.find(key);
      if (it == cache->d.end()) {
        Expr x = G_copy[i * nn + j];
        for (int l : w.letters) x = diff_component(x, l, nn);
        it = cache->d.emplace(key, x).first;
      }
      e = &it->second;
    }
    std::vector<double> v(u.begin(), u.end());
    if (nn == 1) v.push_back(u[0]);
    return e->eval(v);
  };
  return f;
}

TrajectoryState make_trajectory(const ProblemSpec& problem, int n_points, const SchemeSpec* scheme, double epsilon,
                                double dt, int channel) {
  CircleGrid g(n_points);
  std::vector<double> samples(static_cast<size_t>(n_points) * problem.n);
  for (int c = 0; c < problem.n; ++c)
    for (int j = 0; j < n_points; ++j) {
      double x = g.point(j);
      samples[static_cast<size_t>(c) * n_points + j] = problem.initial[c].eval(std::span<const double>(&x, 1));
    }
  TrajectoryState s;
  s.u = transform(samples, g, problem.n);
  for (int c = 0; c < problem.n; ++c) s.u.at(c, n_points / 2) = 0.0;
  s.scheme = scheme;
  s.epsilon = epsilon;
  s.dt = dt;
  s.channel = channel;
  return s;
}

namespace {

void build_cache(TrajectoryState& s, const ProblemSpec& p) {
  const int K = s.u.kmax();
  s.decay.assign(K + 1, 1.0);
  s.dsym.assign(K + 1, 0.0);
  for (int k = 1; k <= K; ++k) {
    if (s.scheme) {
      auto sym = multiplier_symbols(*s.scheme, s.epsilon, k);
      s.decay[k] = std::isfinite(sym.laplacian) ? std::exp(p.nu * sym.laplacian * s.dt) : 0.0;
      s.dsym[k] = sym.derivative;
    } else {
      s.decay[k] = std::exp(-p.nu * double(k) * k * s.dt);
      s.dsym[k] = cplx(0.0, double(k));
    }
  }
  s.cached_dt = s.dt;
}

void step_impl(TrajectoryState& s, const ProblemSpec& p, double lambda, const CoupledGaussianState& noise) {
  if (!(s.dt > 0)) throw std::invalid_argument("time step must be positive");
  if (noise.nu() != p.nu || noise.sigma() != p.sigma)
    throw std::invalid_argument("noise state and problem disagree on nu or sigma");
  if (std::abs(noise.last_dt() - s.dt) > 1e-15 * s.dt) throw std::invalid_argument("noise was not evolved by this dt");
  if (s.cached_dt != s.dt) build_cache(s, p);
  const int N = s.u.n_points(), K = s.u.kmax(), n = p.n;
  const bool nonlinear = p.has_F() || p.has_G() || lambda != 0.0;

  SpectralField drift;
  if (nonlinear) {
    const int M = padded_size(N);
    auto up = resample(s.u, M);
    std::vector<std::vector<double>> U(n, std::vector<double>(M)), DU, acc(n, std::vector<double>(M, 0.0));
    for (int c = 0; c < n; ++c) inverse_component(up, c, U[c]);
    double sup = 0;
    for (int c = 0; c < n; ++c)
      for (double v : U[c]) {
        if (!std::isfinite(v) || std::abs(v) > 1e150) throw BlowUpError(s.t, "non-finite field value");
        sup = std::max(sup, std::abs(v));
      }
    s.sup_norm = sup;
    s.sup_time = s.t;
    std::vector<const double*> vars;
    for (int c = 0; c < n; ++c) vars.push_back(U[c].data());
    if (n == 1) vars.push_back(U[0].data());
    std::vector<double> tmp(M);
    if (p.has_G()) {
      DU.assign(n, std::vector<double>(M));
      SpectralField du(M, n);
      for (int c = 0; c < n; ++c)
        for (int k = 1; k <= K; ++k) du.at(c, k) = s.dsym[k] * s.u.at(c, k);
      for (int c = 0; c < n; ++c) inverse_component(du, c, DU[c]);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const Expr& g = p.G[i * n + j];
          double cst;
          if (g.is_constant(&cst) && cst == 0.0) continue;
          g.eval_vec(vars, M, tmp.data());
          for (int x = 0; x < M; ++x) acc[i][x] += tmp[x] * DU[j][x];
        }
    }
    if (p.has_F())
      for (int i = 0; i < n; ++i) {
        p.F[i].eval_vec(vars, M, tmp.data());
        for (int x = 0; x < M; ++x) acc[i][x] += tmp[x];
      }
    if (lambda != 0.0) {
      auto dg = p.div_G();
      for (int i = 0; i < n; ++i) {
        dg[i].eval_vec(vars, M, tmp.data());
        for (int x = 0; x < M; ++x) acc[i][x] -= lambda * tmp[x];
      }
    }
    std::vector<double> flat(static_cast<size_t>(M) * n);
    for (int i = 0; i < n; ++i) std::copy(acc[i].begin(), acc[i].end(), flat.begin() + static_cast<size_t>(i) * M);
    drift = resample(transform(flat, CircleGrid(M), n), N);
  } else {
    auto vals = inverse_transform(s.u);
    double sup = 0;
    for (double v : vals) {
      if (!std::isfinite(v)) throw BlowUpError(s.t, "non-finite field value");
      sup = std::max(sup, std::abs(v));
    }
    s.sup_norm = sup;
    s.sup_time = s.t;
  }

  for (int c = 0; c < n; ++c) {
    cplx* u = s.u.component(c).data();
    u[0] = u[0] + (nonlinear ? s.dt * drift.at(c, 0).real() : 0.0) + p.sigma * noise.last_dw0(c);
    u[0] = cplx(u[0].real(), 0.0);
    for (int k = 1; k <= K; ++k) {
      cplx v = u[k];
      if (nonlinear) v += s.dt * drift.at(c, k);
      v *= s.decay[k];
      if (k <= noise.channel(s.channel).kmax) v += noise.noise_increment(s.channel, k, c);
      u[k] = v;
    }
    u[N / 2] = 0.0;
  }
  s.t += s.dt;
  for (const auto& v : s.u.raw())
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw BlowUpError(s.t, "non-finite coefficient");
}

}  // namespace

void step_approximate(TrajectoryState& s, const ProblemSpec& problem, const CoupledGaussianState& noise) {
  step_impl(s, problem, 0.0, noise);
}

void step_corrected_limit(TrajectoryState& s, const ProblemSpec& problem, double lambda,
                          const CoupledGaussianState& noise) {
  if (s.scheme && !s.scheme->exact_derivative) throw std::invalid_argument("corrected limit needs the exact pseudo-scheme");
  step_impl(s, problem, lambda, noise);
}

bool StoppingMonitor::observe(double t, double sup) {
  if (triggered_at) return true;
  if (!std::isfinite(sup) || sup >= K) {
    triggered_at = t;
    return true;
  }
  return false;
}

double field_sup_norm(const SpectralField& u, int oversample) {
  auto vals = inverse_transform(oversample > 1 ? resample(u, u.n_points() * oversample) : u);
  return sup_norm(vals);
}

StoppingMonitor monitor_stopping(const std::vector<TrajectoryState>& traj, double K) {
  StoppingMonitor m;
  m.K = K;
  for (const auto& s : traj) {
    double sup = INFINITY;
    bool finite = true;
    for (const auto& v : s.u.raw()) finite = finite && std::isfinite(v.real()) && std::isfinite(v.imag());
    if (finite) sup = field_sup_norm(s.u);
    if (m.observe(s.t, sup)) break;
  }
  return m;
}

CorrectionDensity correction_density(const CoupledGaussianState& state, int channel, const SchemeSpec& scheme,
                                     double epsilon, int lift_points, double gamma, double lambda) {
  CorrectionDensity out;
  out.n = state.dim();
  out.lambda = lambda;
  out.gamma = gamma;
  auto X = assemble_channel(state, channel, lift_points);
  auto rp = GridRoughPath::from_field(inverse_transform(X), state.dim(), 2);
  auto level2 = d_eps_rough_level(rp, scheme.mu, epsilon, 2);
  const int n = state.dim();
  CircleGrid g(lift_points);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      auto v = level2[i * n + j];
      for (auto& x : v) x = (i == j ? lambda : 0.0) - x;
      auto H = transform(v, g);
      H.at(0, lift_points / 2) = 0.0;
      out.besov_norm = std::max(out.besov_norm, besov_norm(H, -gamma));
      out.H.push_back(std::move(H));
    }
  return out;
}

}  // namespace roughspde

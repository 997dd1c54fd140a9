#include "roughspde/gaussian_field.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace roughspde {

namespace rng {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t hash(uint64_t seed, uint64_t step, uint64_t k, uint64_t comp, uint64_t slot) {
  uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ step);
  h = splitmix64(h ^ (k * 0x100000001b3ULL));
  h = splitmix64(h ^ (comp << 32 | slot));
  return h;
}

std::pair<double, double> normal_pair(uint64_t seed, uint64_t step, uint64_t k, uint64_t comp, uint64_t slot) {
  uint64_t h1 = hash(seed, step, k, comp, slot);
  uint64_t h2 = splitmix64(h1 ^ 0xd1b54a32d192ed03ULL);
  // uniforms in (0, 1]
  double u1 = (static_cast<double>(h1 >> 11) + 1.0) * 0x1.0p-53;
  double u2 = static_cast<double>(h2 >> 11) * 0x1.0p-53;
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * kPi * u2;
  return {r * std::cos(a), r * std::sin(a)};
}

}  // namespace rng

namespace {

constexpr uint64_t kInitStep = std::numeric_limits<uint64_t>::max();

// lower-triangular factor of a correlation matrix; rank-deficient directions
// (exactly or numerically duplicated channels) get zero columns
std::vector<double> semi_cholesky(const std::vector<double>& A, int n) {
  std::vector<double> L(static_cast<size_t>(n) * n, 0.0);
  for (int j = 0; j < n; ++j) {
    double d = A[j * n + j];
    for (int p = 0; p < j; ++p) d -= L[j * n + p] * L[j * n + p];
    if (d <= 1e-13) continue;
    double ljj = std::sqrt(d);
    L[j * n + j] = ljj;
    for (int i = j + 1; i < n; ++i) {
      double s = A[i * n + j];
      for (int p = 0; p < j; ++p) s -= L[i * n + p] * L[j * n + p];
      L[i * n + j] = s / ljj;
    }
  }
  return L;
}

}  // namespace

CoupledGaussianState::CoupledGaussianState(std::vector<ChannelSpec> channels, int dim, uint64_t seed, double nu,
                                           double sigma)
    : spec_(std::move(channels)), dim_(dim), seed_(seed), nu_(nu), sigma_(sigma) {
  if (spec_.empty()) throw std::invalid_argument("at least one channel required");
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  if (!(nu > 0) || sigma < 0) throw std::invalid_argument("need nu > 0 and sigma >= 0");
  for (const auto& c : spec_) kmax_ = std::max(kmax_, c.kmax);
  const size_t C = spec_.size();
  rate_.assign((kmax_ + 1) * C, -1.0);
  amp_.assign((kmax_ + 1) * C, 0.0);
  for (size_t c = 0; c < C; ++c) {
    const auto& ch = spec_[c];
    for (int k = 1; k <= ch.kmax; ++k) {
      double m = 1.0, h = 1.0;
      if (ch.scheme) {
        double x = ch.epsilon * k;
        m = ch.scheme->m(x);
        h = ch.scheme->h(x);
      }
      if (!std::isfinite(m) || h == 0.0) continue;
      if (!(m > 0)) throw SchemeDomainError("m must be positive on carried modes");
      double lam = nu * double(k) * k * m;
      rate_[idx(static_cast<int>(c), k)] = lam;
      amp_[idx(static_cast<int>(c), k)] = sigma * h / std::sqrt(2.0 * lam);
    }
  }
  eta_.assign((kmax_ + 1) * C * dim_ * 2, 0.0);
  innov_.assign(eta_.size(), 0.0);
  w0_.assign(dim_, 0.0);
  dw0_.assign(dim_, 0.0);
  init_stationary();
}

double CoupledGaussianState::q(int c, int k) const {
  if (!active(c, k)) return 0.0;
  return amp(c, k) * std::sqrt(2.0 * nu_) * k / sigma_;
}

double CoupledGaussianState::stationary_correlation(int a, int b, int k) const {
  if (!active(a, k) || !active(b, k)) return 0.0;
  double la = rate(a, k), lb = rate(b, k);
  double s = 2.0 * std::sqrt(la * lb) / (la + lb);
  return (amp(a, k) > 0) == (amp(b, k) > 0) ? s : -s;
}

void CoupledGaussianState::build_factors(double dt) {
  const int C = channels();
  factors_.assign(kmax_ + 1, {});
  for (int k = 1; k <= kmax_; ++k) {
    auto& f = factors_[k];
    f.rep.assign(C, -1);
    for (int c = 0; c < C; ++c) {
      if (!active(c, k)) continue;
      for (size_t j = 0; j < f.group.size(); ++j)
        if (rate(f.group[j], k) == rate(c, k)) {
          f.rep[c] = static_cast<int>(j);
          break;
        }
      if (f.rep[c] < 0) {
        f.rep[c] = static_cast<int>(f.group.size());
        f.group.push_back(c);
      }
    }
    const int n = static_cast<int>(f.group.size());
    std::vector<double> A(static_cast<size_t>(n) * n);
    f.rho.resize(n);
    for (int i = 0; i < n; ++i) {
      double li = rate(f.group[i], k);
      f.rho[i] = dt > 0 ? std::exp(-li * dt) : 0.0;
      for (int j = 0; j < n; ++j) {
        double lj = rate(f.group[j], k);
        double s = li + lj;
        if (dt > 0) {
          // innovation correlation of the two stochastic convolutions over one step
          double vi = -std::expm1(-2 * li * dt), vj = -std::expm1(-2 * lj * dt);
          A[i * n + j] = i == j ? 1.0 : 2.0 * std::sqrt(li * lj) * (-std::expm1(-s * dt)) / (s * std::sqrt(vi * vj));
        } else {
          A[i * n + j] = i == j ? 1.0 : 2.0 * std::sqrt(li * lj) / s;  // stationary law
        }
      }
    }
    f.L = semi_cholesky(A, n);
  }
  factor_dt_ = dt;
}

void CoupledGaussianState::init_stationary() {
  time_ = 0.0;
  step_ = 0;
  std::fill(w0_.begin(), w0_.end(), 0.0);
  std::fill(innov_.begin(), innov_.end(), 0.0);
  build_factors(0.0);
  const int C = channels();
  std::vector<double> xi, e;
  for (int k = 1; k <= kmax_; ++k) {
    const auto& f = factors_[k];
    const int n = static_cast<int>(f.group.size());
    xi.resize(2 * n);
    e.resize(2 * n);
    for (int comp = 0; comp < dim_; ++comp) {
      for (int j = 0; j < n; ++j) std::tie(xi[2 * j], xi[2 * j + 1]) = rng::normal_pair(seed_, kInitStep, k, comp, j);
      for (int i = 0; i < n; ++i)
        for (int sc = 0; sc < 2; ++sc) {
          double s = 0;
          for (int j = 0; j <= i; ++j) s += f.L[i * n + j] * xi[2 * j + sc];
          e[2 * i + sc] = s;
        }
      for (int c = 0; c < C; ++c) {
        if (f.rep[c] < 0) continue;
        for (int sc = 0; sc < 2; ++sc) eta(c, k, comp, sc) = e[2 * f.rep[c] + sc];
      }
    }
  }
  factor_dt_ = -1.0;
}

void CoupledGaussianState::evolve(double dt) {
  if (!(dt > 0)) throw std::invalid_argument("evolve needs dt > 0");
  if (dt != factor_dt_) build_factors(dt);
  const int C = channels();
  std::vector<double> xi, e;
  for (int k = 1; k <= kmax_; ++k) {
    const auto& f = factors_[k];
    const int n = static_cast<int>(f.group.size());
    xi.resize(2 * n);
    e.resize(2 * n);
    for (int comp = 0; comp < dim_; ++comp) {
      for (int j = 0; j < n; ++j) std::tie(xi[2 * j], xi[2 * j + 1]) = rng::normal_pair(seed_, step_, k, comp, j);
      for (int i = 0; i < n; ++i)
        for (int sc = 0; sc < 2; ++sc) {
          double s = 0;
          for (int j = 0; j <= i; ++j) s += f.L[i * n + j] * xi[2 * j + sc];
          e[2 * i + sc] = s;
        }
      for (int i = 0; i < n; ++i) {
        int c0 = f.group[i];
        double rho = f.rho[i], sr = std::sqrt(-std::expm1(-2 * rate(c0, k) * dt));
        for (int sc = 0; sc < 2; ++sc) {
          double v = rho * eta(c0, k, comp, sc) + sr * e[2 * i + sc];
          for (int c = 0; c < C; ++c)
            if (f.rep[c] == i) {
              eta(c, k, comp, sc) = v;
              innov_[eidx(c, k, comp, sc)] = e[2 * i + sc];
            }
        }
      }
    }
  }
  for (int comp = 0; comp < dim_; ++comp) {
    dw0_[comp] = std::sqrt(dt) * rng::normal_pair(seed_, step_, 0, comp, 0).first;
    w0_[comp] += dw0_[comp];
  }
  dt_ = dt;
  ++step_;
  time_ = step_ * dt;
}

cplx CoupledGaussianState::noise_increment(int c, int k, int comp) const {
  if (!active(c, k) || dt_ == 0.0) return 0.0;
  double s = amp(c, k) * std::sqrt(-std::expm1(-2 * rate(c, k) * dt_)) / std::sqrt(2.0);
  return {s * innovation(c, k, comp, 1), -s * innovation(c, k, comp, 0)};
}

void CoupledGaussianState::dump_csv(std::ostream& os) const {
  os << "channel,k,comp,eta_sin,eta_cos,rate,amp\n";
  os.precision(17);
  for (int c = 0; c < channels(); ++c)
    for (int k = 1; k <= kmax_; ++k)
      for (int comp = 0; comp < dim_; ++comp) {
        if (!active(c, k)) continue;
        os << c << ',' << k << ',' << comp << ',' << eta(c, k, comp, 0) << ',' << eta(c, k, comp, 1) << ','
           << rate(c, k) << ',' << amp(c, k) << '\n';
      }
  for (int comp = 0; comp < dim_; ++comp) os << "w0,0," << comp << ',' << w0_[comp] << ",0,0,0\n";
}

CoupledGaussianState init_stationary(const SchemeSpec& scheme, double epsilon, const CircleGrid& grid, int n,
                                     uint64_t seed, double nu, double sigma) {
  std::vector<ChannelSpec> ch = {{nullptr, 0.0, grid.kmax()}, {&scheme, epsilon, grid.kmax()}};
  return CoupledGaussianState(std::move(ch), n, seed, nu, sigma);
}

SpectralField assemble_channel(const CoupledGaussianState& s, int c, int n_points) {
  SpectralField u(n_points, s.dim());
  const int kk = std::min(u.kmax(), s.channel(c).kmax);
  constexpr double r2 = 0.70710678118654752440;
  for (int comp = 0; comp < s.dim(); ++comp) {
    u.at(comp, 0) = s.sigma() * s.w0(comp);
    for (int k = 1; k <= kk; ++k) {
      if (!s.active(c, k)) continue;
      double a = s.amp(c, k) * r2;
      u.at(comp, k) = {a * s.eta(c, k, comp, 1), -a * s.eta(c, k, comp, 0)};
    }
  }
  return u;
}

std::pair<SpectralField, SpectralField> assemble_fields(const CoupledGaussianState& s, const CircleGrid& grid) {
  if (s.channels() < 2) throw std::invalid_argument("assemble_fields needs a reference and an approximate channel");
  return {assemble_channel(s, 0, grid.n_points()), assemble_channel(s, 1, grid.n_points())};
}

SpectralField power_law_field(int n_points, int kmax, double alpha, int dim, uint64_t seed) {
  SpectralField u(n_points, dim);
  kmax = std::min(kmax, u.kmax());
  for (int c = 0; c < dim; ++c)
    for (int k = 1; k <= kmax; ++k) {
      auto [a, b] = rng::normal_pair(seed, 0, k, c, 0);
      double s = std::pow(double(k), -(alpha + 0.5));
      u.at(c, k) = cplx(a, b) * s;
    }
  return u;
}

}  // namespace roughspde

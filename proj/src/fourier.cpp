#include "roughspde/fourier.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>

#include "roughspde/scheme.hpp"

namespace roughspde {

namespace fft {
namespace {

struct PlanPair {
  fftw_plan fwd;
  fftw_plan bwd;
};

std::mutex g_plan_mutex;

const PlanPair& plans_for(int n) {
  static std::map<int, PlanPair> cache;
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<double> r(n);
  std::vector<cplx> c(n / 2 + 1);
  auto* cc = reinterpret_cast<fftw_complex*>(c.data());
  PlanPair p;
  // FFTW_ESTIMATE keeps plan choice deterministic; UNALIGNED lets us execute on any buffer
  p.fwd = fftw_plan_dft_r2c_1d(n, r.data(), cc, FFTW_ESTIMATE | FFTW_UNALIGNED);
  p.bwd = fftw_plan_dft_c2r_1d(n, cc, r.data(), FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_DESTROY_INPUT);
  return cache.emplace(n, p).first->second;
}

}  // namespace

void r2c(int n, const double* in, cplx* out) {
  const auto& p = plans_for(n);
  fftw_execute_dft_r2c(p.fwd, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
}

void c2r(int n, const cplx* in, double* out) {
  const auto& p = plans_for(n);
  thread_local std::vector<cplx> scratch;
  scratch.assign(in, in + n / 2 + 1);
  fftw_execute_dft_c2r(p.bwd, reinterpret_cast<fftw_complex*>(scratch.data()), out);
}

}  // namespace fft

CircleGrid::CircleGrid(int n_points) : n_(n_points) {
  if (n_points < 4 || n_points % 2 != 0) throw ShapeError("grid size must be even and >= 4, got " + std::to_string(n_points));
}

std::vector<double> CircleGrid::points() const {
  std::vector<double> x(n_);
  for (int j = 0; j < n_; ++j) x[j] = point(j);
  return x;
}

int CircleGrid::for_epsilon(double eps) {
  if (!(eps > 0)) throw std::invalid_argument("epsilon must be positive");
  int n = static_cast<int>(std::ceil(2.0 * kPi / eps - 1e-9));
  if (n % 2) ++n;
  return std::max(n, 4);
}

SpectralField::SpectralField(int n_points, int dim) : n_(n_points), dim_(dim) {
  if (n_points < 4 || n_points % 2 != 0) throw ShapeError("field size must be even and >= 4");
  if (dim < 1) throw ShapeError("field dimension must be >= 1");
  c_.assign(static_cast<size_t>(dim) * half(), cplx(0.0, 0.0));
}

cplx SpectralField::coeff(int comp, int k) const {
  if (k > n_ / 2 || k < -n_ / 2) return 0.0;
  return k >= 0 ? at(comp, k) : std::conj(at(comp, -k));
}

double SpectralField::eval(int comp, double x) const {
  double s = at(comp, 0).real();
  for (int k = 1; k <= kmax(); ++k) s += 2.0 * (at(comp, k) * std::polar(1.0, k * x)).real();
  s += (at(comp, n_ / 2) * std::polar(1.0, (n_ / 2) * x)).real();
  return s / kSqrt2Pi;
}

double SpectralField::reality_defect() const {
  double d = 0.0;
  for (int c = 0; c < dim_; ++c) d = std::max({d, std::abs(at(c, 0).imag()), std::abs(at(c, n_ / 2).imag())});
  return d;
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  if (o.n_ != n_ || o.dim_ != dim_) throw ShapeError("field shape mismatch");
  for (size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  if (o.n_ != n_ || o.dim_ != dim_) throw ShapeError("field shape mismatch");
  for (size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double s) {
  for (auto& v : c_) v *= s;
  return *this;
}

SpectralField transform(std::span<const double> samples, const CircleGrid& grid, int dim) {
  const int n = grid.n_points();
  if (samples.size() != static_cast<size_t>(n) * dim)
    throw ShapeError("expected " + std::to_string(n * dim) + " samples, got " + std::to_string(samples.size()));
  SpectralField u(n, dim);
  const double scale = kSqrt2Pi / n;
  for (int c = 0; c < dim; ++c) {
    auto out = u.component(c);
    fft::r2c(n, samples.data() + static_cast<size_t>(c) * n, out.data());
    // e^{-ik x_j} = (-1)^k e^{-2 pi i jk/N}
    for (int k = 0; k <= n / 2; ++k) out[k] *= (k % 2 ? -scale : scale);
  }
  return u;
}

void inverse_component(const SpectralField& u, int comp, std::span<double> out) {
  const int n = u.n_points();
  if (out.size() != static_cast<size_t>(n)) throw ShapeError("output length mismatch");
  thread_local std::vector<cplx> z;
  z.resize(n / 2 + 1);
  auto in = u.component(comp);
  const double scale = 1.0 / kSqrt2Pi;
  for (int k = 0; k <= n / 2; ++k) z[k] = in[k] * (k % 2 ? -scale : scale);
  fft::c2r(n, z.data(), out.data());
}

std::vector<double> inverse_transform(const SpectralField& u) {
  const int n = u.n_points();
  std::vector<double> s(static_cast<size_t>(n) * u.dim());
  for (int c = 0; c < u.dim(); ++c) inverse_component(u, c, std::span<double>(s.data() + static_cast<size_t>(c) * n, n));
  return s;
}

SpectralField resample(const SpectralField& u, int m_points) {
  SpectralField v(m_points, u.dim());
  const int kk = std::min(u.kmax(), v.kmax());
  for (int c = 0; c < u.dim(); ++c)
    for (int k = 0; k <= kk; ++k) v.at(c, k) = u.at(c, k);
  return v;
}

int padded_size(int n_points) {
  int m = (3 * n_points + 1) / 2;
  if (m % 2) ++m;
  return m;
}

MultiplierOperator MultiplierOperator::identity() {
  return {MultiplierKind::identity, [](int) { return cplx(1.0, 0.0); }, 0.0};
}

MultiplierOperator MultiplierOperator::exact_laplacian() {
  return {MultiplierKind::laplacian, [](int k) { return cplx(-double(k) * k, 0.0); }, 0.0};
}

MultiplierOperator MultiplierOperator::exact_derivative() {
  return {MultiplierKind::derivative, [](int k) { return cplx(0.0, double(k)); }, 0.0};
}

MultiplierOperator MultiplierOperator::shift(double s) {
  return {MultiplierKind::identity, [s](int k) { return std::polar(1.0, k * s); }, 0.0};
}

SpectralField apply_multiplier(const MultiplierOperator& op, const SpectralField& u) {
  SpectralField out(u.n_points(), u.dim());
  const int kmax = u.kmax();
  std::vector<cplx> sym(kmax + 1);
  for (int k = 0; k <= kmax; ++k) {
    sym[k] = op.symbol(k);
    if (!std::isfinite(sym[k].real()) || !std::isfinite(sym[k].imag())) {
      if (op.kind == MultiplierKind::laplacian && sym[k].real() == -INFINITY) continue;
      throw SchemeDomainError("multiplier symbol undefined at k = " + std::to_string(k));
    }
  }
  for (int c = 0; c < u.dim(); ++c) {
    for (int k = 0; k <= kmax; ++k) {
      // -inf Laplacian symbol: the mode is outside the scheme and is dropped
      out.at(c, k) = std::isfinite(sym[k].real()) ? sym[k] * u.at(c, k) : cplx(0.0);
    }
    out.at(c, 0) = cplx(out.at(c, 0).real(), 0.0);
  }
  return out;
}

SpectralField apply_derivative_physical(const SpectralField& u, const SignedAtomicMeasure& mu, double epsilon) {
  if (mu.atoms.empty()) throw SchemeDomainError("empty measure");
  if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be positive");
  const int n = u.n_points();
  std::vector<double> acc(static_cast<size_t>(n) * u.dim(), 0.0);
  for (const auto& a : mu.atoms) {
    auto shifted = inverse_transform(apply_multiplier(MultiplierOperator::shift(epsilon * a.y), u));
    for (size_t i = 0; i < acc.size(); ++i) acc[i] += a.c * shifted[i];
  }
  for (auto& v : acc) v /= epsilon;
  auto out = transform(acc, CircleGrid(n), u.dim());
  for (int c = 0; c < u.dim(); ++c) out.at(c, n / 2) = 0.0;
  return out;
}

SpectralField heat_semigroup(double t, const SpectralField& u, const SchemeSpec* scheme, double epsilon) {
  if (t < 0) throw std::invalid_argument("heat semigroup needs t >= 0");
  SpectralField out = u;
  if (t == 0) return out;
  for (int k = 1; k <= u.kmax(); ++k) {
    double m = scheme ? scheme->m(epsilon * k) : 1.0;
    double f = std::isfinite(m) ? std::exp(-t * double(k) * k * m) : 0.0;
    for (int c = 0; c < u.dim(); ++c) out.at(c, k) *= f;
  }
  for (int c = 0; c < u.dim(); ++c) out.at(c, u.n_points() / 2) = 0.0;
  return out;
}

}  // namespace roughspde

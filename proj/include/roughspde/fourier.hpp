#pragma once
// Spectral representation of fields on the circle [-pi, pi).
//
// Normalization used everywhere in the library:
//   u(x)   = (1/sqrt(2 pi)) * sum_k u^(k) e^{ikx}
//   u^(k)  = (sqrt(2 pi)/N) * sum_j u(x_j) e^{-ikx_j},   x_j = -pi + 2 pi j / N.
// A constant field c therefore has u^(0) = sqrt(2 pi) c.

#include <complex>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace roughspde {

using cplx = std::complex<double>;
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSqrt2Pi = 2.5066282746310002;

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct SchemeDomainError : std::domain_error {
  using std::domain_error::domain_error;
};

class CircleGrid {
 public:
  explicit CircleGrid(int n_points);
  int n_points() const { return n_; }
  double spacing() const { return 2.0 * kPi / n_; }
  double point(int j) const { return -kPi + spacing() * j; }
  std::vector<double> points() const;
  int kmax() const { return n_ / 2 - 1; }

  // smallest even N with N >= 2 pi / eps; ties the resolved band to eps
  static int for_epsilon(double eps);

 private:
  int n_;
};

// Real field with `dim` components.  Coefficients are stored for k = 0..N/2
// per component; negative k follow from conjugate symmetry.  The Nyquist
// coefficient k = N/2 is only kept so that transform/inverse round-trip;
// every multiplier operation removes it.
class SpectralField {
 public:
  SpectralField() = default;
  SpectralField(int n_points, int dim = 1);

  int n_points() const { return n_; }
  int dim() const { return dim_; }
  int kmax() const { return n_ / 2 - 1; }
  int half() const { return n_ / 2 + 1; }

  cplx& at(int comp, int k) { return c_[static_cast<size_t>(comp) * half() + k]; }
  const cplx& at(int comp, int k) const { return c_[static_cast<size_t>(comp) * half() + k]; }
  // any k in [-N/2, N/2], conjugate symmetry applied for k < 0
  cplx coeff(int comp, int k) const;

  std::span<cplx> component(int comp) { return {c_.data() + static_cast<size_t>(comp) * half(), static_cast<size_t>(half())}; }
  std::span<const cplx> component(int comp) const {
    return {c_.data() + static_cast<size_t>(comp) * half(), static_cast<size_t>(half())};
  }
  std::vector<cplx>& raw() { return c_; }
  const std::vector<cplx>& raw() const { return c_; }

  // exact trigonometric evaluation at an arbitrary point
  double eval(int comp, double x) const;
  // max |Im| of the modes that must be real (k = 0 and Nyquist)
  double reality_defect() const;

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double s);

 private:
  int n_ = 0;
  int dim_ = 0;
  std::vector<cplx> c_;
};

// samples are component-major: samples[c * N + j]
SpectralField transform(std::span<const double> samples, const CircleGrid& grid, int dim = 1);
std::vector<double> inverse_transform(const SpectralField& u);
// one component, written into out (size N)
void inverse_component(const SpectralField& u, int comp, std::span<double> out);

// spectral zero-padding or truncation to M points; drops the Nyquist mode
SpectralField resample(const SpectralField& u, int m_points);
// dealiasing grid for quadratic products: smallest even M >= 3N/2
int padded_size(int n_points);

enum class MultiplierKind { laplacian, derivative, noise_filter, identity };

struct MultiplierOperator {
  MultiplierKind kind = MultiplierKind::identity;
  std::function<cplx(int)> symbol;
  double epsilon = 0.0;

  static MultiplierOperator identity();
  static MultiplierOperator exact_laplacian();
  static MultiplierOperator exact_derivative();
  static MultiplierOperator shift(double s);
};

SpectralField apply_multiplier(const MultiplierOperator& op, const SpectralField& u);

struct SignedAtomicMeasure;
// (1/eps) sum_j c_j u(x + eps y_j), evaluated in physical space from exact
// trigonometric shifts of u
SpectralField apply_derivative_physical(const SpectralField& u, const SignedAtomicMeasure& mu, double epsilon);

struct SchemeSpec;
// u^(k) <- exp(-t k^2 m(eps k)) u^(k); exact kernel when scheme is null
SpectralField heat_semigroup(double t, const SpectralField& u, const SchemeSpec* scheme = nullptr,
                             double epsilon = 0.0);

namespace fft {
// raw transforms on N samples <-> N/2+1 half-complex values (unnormalized FFTW
// convention); plans are cached per size and shared across threads
void r2c(int n, const double* in, cplx* out);
void c2r(int n, const cplx* in, double* out);
}  // namespace fft

}  // namespace roughspde

#pragma once
// Coupled Ornstein-Uhlenbeck modes of the stationary field X and its scheme
// approximations X_eps, all driven by one cylindrical Wiener process.
//
// Channel c carries, for every mode k >= 1 and component, a sin and a cos
// coefficient evolving as
//   dZ = -lambda_c(k) Z dt + sigma h_c(k) dB,   lambda_c(k) = nu k^2 m_c(eps_c k),
// in the orthonormal basis cos(kx)/sqrt(pi), sin(kx)/sqrt(pi).  The library
// stores eta = Z / amp_c(k) with amp_c(k) = sigma |h_c| / sqrt(2 lambda_c), so
// every eta component has unit stationary variance.  The zero mode is the
// Brownian motion w0 shared by all channels; it enters fields as sigma w0/sqrt(2 pi).
//
// Channel 0 is the reference by convention.  Draws are assigned per
// (seed, step, k, component, channel) by a counter-based hash, so results do
// not depend on evaluation order or thread count.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "roughspde/fourier.hpp"
#include "roughspde/scheme.hpp"

namespace roughspde {

namespace rng {
uint64_t splitmix64(uint64_t x);
uint64_t hash(uint64_t seed, uint64_t step, uint64_t k, uint64_t comp, uint64_t slot);
// two independent standard normals from one counter
std::pair<double, double> normal_pair(uint64_t seed, uint64_t step, uint64_t k, uint64_t comp, uint64_t slot);
}  // namespace rng

struct ChannelSpec {
  const SchemeSpec* scheme = nullptr;  // null: exact operators, m = h = 1
  double epsilon = 0.0;
  int kmax = 0;                        // highest mode carried
};

struct ModeState {
  int k;
  double eta_sin, eta_cos;          // reference channel
  double eta_eps_sin, eta_eps_cos;  // approximate channel
  double rate, rate_eps;
  double amp, amp_eps;              // q-factors: 1 and h/sqrt(m)
};

class CoupledGaussianState {
 public:
  CoupledGaussianState(std::vector<ChannelSpec> channels, int dim, uint64_t seed, double nu = 1.0, double sigma = 1.0);

  int channels() const { return static_cast<int>(spec_.size()); }
  int dim() const { return dim_; }
  int kmax() const { return kmax_; }
  double time() const { return time_; }
  uint64_t steps() const { return step_; }
  uint64_t seed() const { return seed_; }
  double nu() const { return nu_; }
  double sigma() const { return sigma_; }
  const ChannelSpec& channel(int c) const { return spec_[c]; }

  bool active(int c, int k) const { return rate(c, k) >= 0; }
  // nu k^2 m(eps k); negative if the channel does not carry mode k
  double rate(int c, int k) const { return rate_[idx(c, k)]; }
  // stationary sd of the ONB coefficient
  double amp(int c, int k) const { return amp_[idx(c, k)]; }
  // q_k = h / sqrt(m), the factor multiplying 1/k in the field series
  double q(int c, int k) const;
  double eta(int c, int k, int comp, int sc) const { return eta_[eidx(c, k, comp, sc)]; }
  double& eta(int c, int k, int comp, int sc) { return eta_[eidx(c, k, comp, sc)]; }
  double w0(int comp) const { return w0_[comp]; }
  // standard-normal innovation used in the most recent evolve
  double innovation(int c, int k, int comp, int sc) const { return innov_[eidx(c, k, comp, sc)]; }
  double last_dw0(int comp) const { return dw0_[comp]; }
  double last_dt() const { return dt_; }

  // exact joint stationary law; w0 = 0, time = 0
  void init_stationary();
  void evolve(double dt);

  // stochastic-convolution increment of the last step in the spectral
  // normalization of SpectralField, for channel c, mode k >= 1
  cplx noise_increment(int c, int k, int comp) const;
  // stationary correlation of channels a, b at mode k (closed form)
  double stationary_correlation(int a, int b, int k) const;

  void dump_csv(std::ostream& os) const;

 private:
  size_t idx(int c, int k) const { return static_cast<size_t>(k) * spec_.size() + c; }
  size_t eidx(int c, int k, int comp, int sc) const {
    return ((static_cast<size_t>(k) * spec_.size() + c) * dim_ + comp) * 2 + sc;
  }
  void build_factors(double dt);

  std::vector<ChannelSpec> spec_;
  int dim_;
  uint64_t seed_;
  double nu_, sigma_;
  int kmax_ = 0;
  double time_ = 0.0;
  uint64_t step_ = 0;
  double dt_ = 0.0;
  std::vector<double> rate_, amp_, sign_;
  std::vector<double> eta_, innov_;
  std::vector<double> w0_, dw0_;

  // per mode: channel groups, lower-triangular factor of the innovation correlation
  struct ModeFactor {
    std::vector<int> rep;    // per channel: representative index into distinct, or -1
    std::vector<int> group;  // distinct channel list (first member)
    std::vector<double> L;   // row-major n_distinct^2
    std::vector<double> rho; // per distinct: e^{-lambda dt}
  };
  std::vector<ModeFactor> factors_;
  double factor_dt_ = -1.0;
};

// two-channel state: reference exact field and (scheme, eps), both resolved to grid.kmax()
CoupledGaussianState init_stationary(const SchemeSpec& scheme, double epsilon, const CircleGrid& grid, int n,
                                     uint64_t seed, double nu = 1.0, double sigma = 1.0);

// field of channel c on a grid of `n_points` (which may exceed the channel resolution)
SpectralField assemble_channel(const CoupledGaussianState& s, int channel, int n_points);
std::pair<SpectralField, SpectralField> assemble_fields(const CoupledGaussianState& s, const CircleGrid& grid);

// Gaussian trigonometric series with coefficients ~ k^{-(alpha + 1/2)} (Hoelder
// regularity just below alpha), zero mean, `dim` independent components
SpectralField power_law_field(int n_points, int kmax, double alpha, int dim, uint64_t seed);

}  // namespace roughspde

#pragma once
// Exponential-Euler integrators for the approximate equation
//   du = [nu Lap_eps u + F(u) + G(u) D_eps u] dt + sigma H_eps dW
// and for the corrected limit with F_bar_i = F_i - Lambda div G_i.

#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "roughspde/expr.hpp"
#include "roughspde/fourier.hpp"
#include "roughspde/gaussian_field.hpp"
#include "roughspde/rough.hpp"
#include "roughspde/scheme.hpp"

namespace roughspde {

struct ProblemSpec {
  int n = 1;
  double nu = 1.0;
  double sigma = 1.0;
  // expressions in the variables u1..un (u for n = 1); initial data in x
  std::vector<Expr> F;                  // n entries
  std::vector<Expr> G;                  // n*n entries, row-major
  std::vector<Expr> initial;            // n entries
  std::vector<std::string> sources;     // canonical text, for hashing

  static ProblemSpec from_strings(int n, double nu, double sigma, const std::vector<std::string>& F,
                                  const std::vector<std::string>& G, const std::vector<std::string>& initial);
  static ProblemSpec burgers(double nu = 1.0, double sigma = 1.0);  // n=1, F=0, G=u, u0=sin x
  static ProblemSpec linear(double nu = 1.0, double sigma = 1.0);   // F=G=0, u0=sin x

  bool has_F() const;
  bool has_G() const;
  // (div G)_i = sum_j dG_ij/du_j, symbolic
  std::vector<Expr> div_G() const;
  // D^w G_ij for building controlled paths
  SmoothMatrixFunction G_function(int max_order) const;
  static std::vector<std::string> variable_names(int n);
};

struct BlowUpError : std::runtime_error {
  double time;
  BlowUpError(double t, const std::string& what) : std::runtime_error(what), time(t) {}
};

struct TrajectoryState {
  SpectralField u;
  double t = 0.0;
  const SchemeSpec* scheme = nullptr;  // null: exact pseudo-scheme
  double epsilon = 0.0;
  double dt = 0.0;
  int channel = 0;                     // noise channel in the shared Gaussian state
  // sup norm of u at time sup_time (entry of the last step, on the dealiasing grid)
  double sup_norm = 0.0;
  double sup_time = 0.0;

  // per-mode propagator and derivative symbol, rebuilt when dt changes
  std::vector<double> decay;
  std::vector<cplx> dsym;
  double cached_dt = -1.0;
};

TrajectoryState make_trajectory(const ProblemSpec& problem, int n_points, const SchemeSpec* scheme, double epsilon,
                                double dt, int channel);

// Steppers.  The shared noise must already have been evolved by dt; each
// trajectory then consumes the innovations of its own channel.
void step_approximate(TrajectoryState& s, const ProblemSpec& problem, const CoupledGaussianState& noise);
void step_corrected_limit(TrajectoryState& s, const ProblemSpec& problem, double lambda,
                          const CoupledGaussianState& noise);

struct StoppingMonitor {
  double K = std::numeric_limits<double>::infinity();
  std::optional<double> triggered_at;
  // record one grid time; returns true once triggered
  bool observe(double t, double sup_norm);
};

StoppingMonitor monitor_stopping(const std::vector<TrajectoryState>& traj, double K);

double field_sup_norm(const SpectralField& u, int oversample = 1);

struct CorrectionDensity {
  int n = 0;
  std::vector<SpectralField> H;  // n*n, row-major: Lambda delta_ij - <D_eps X_eps, e_ij>
  double lambda = 0.0;
  double besov_norm = 0.0;       // max over entries of the B^{-gamma} norm
  double gamma = 0.0;
};

// X_eps is channel `channel` of the state, lifted at level 2 on a circle grid of `lift_points`
CorrectionDensity correction_density(const CoupledGaussianState& state, int channel, const SchemeSpec& scheme,
                                     double epsilon, int lift_points, double gamma, double lambda);

}  // namespace roughspde

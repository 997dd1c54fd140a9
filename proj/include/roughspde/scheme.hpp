#pragma once
// Discretization schemes (m, mu, h) and the correction constant Lambda.

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <tuple>
#include <vector>

#include "roughspde/fourier.hpp"

namespace roughspde {

struct Atom {
  double y;
  double c;
};

struct SignedAtomicMeasure {
  std::vector<Atom> atoms;

  double mass() const;
  double moment(int q) const;
  // sum_j c_j e^{i x y_j}
  cplx fourier(double x) const;
};

struct SchemeSpec {
  std::string name;
  std::function<double(double)> m;  // may return +inf: mode not carried by the scheme
  std::function<double(double)> h;
  SignedAtomicMeasure mu;
  double c_m = 0.5;
  // spectral pseudo-scheme: derivative symbol ik, bypasses mu
  bool exact_derivative = false;
  // positive points where m or h may be non-smooth (quadrature breakpoints)
  std::vector<double> breakpoints;
  // textual description for hashing and reports
  std::string m_src = "1", h_src = "1";
};

// names: forward, backward, central, exact, fd_forward, fd_backward, fd_central
SchemeSpec builtin_scheme(const std::string& name);
std::vector<std::string> builtin_scheme_names();

struct Symbols {
  double laplacian;  // -k^2 m(eps k), -inf when m is infinite
  cplx derivative;   // i k g(eps k)
  double noise;      // h(eps k)
};
Symbols multiplier_symbols(const SchemeSpec& spec, double epsilon, int k);

MultiplierOperator laplacian_operator(const SchemeSpec& spec, double epsilon);
MultiplierOperator derivative_operator(const SchemeSpec& spec, double epsilon);
MultiplierOperator noise_filter_operator(const SchemeSpec& spec, double epsilon);

struct ClauseResult {
  std::string clause;
  bool pass;
  double measured;
  double tolerance;
  std::string detail;
};

struct ValidationReport {
  std::string scheme;
  std::vector<ClauseResult> clauses;
  std::vector<double> bv_t;       // t grid of the b_t variation check
  std::vector<double> bv_values;  // sampled total variation of b_t
  double bv_estimate = 0.0;       // max over the t grid
  bool bv_suspicious = false;     // growth flagged; never certified
  bool ok() const;
  std::string to_text() const;
};

ValidationReport validate_scheme(const SchemeSpec& spec);

struct QuadratureParams {
  double delta = 1e-3;
  double t_max = 1e4;
  double tol = 1e-12;
  int max_depth = 30;
};

struct LambdaResult {
  double value = 0.0;
  double error_estimate = 0.0;
  double tail = 0.0;  // analytic contribution beyond t_max
};

struct QuadratureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

LambdaResult compute_lambda(const SchemeSpec& spec, double nu, double sigma, const QuadratureParams& q = {});

}  // namespace roughspde

#pragma once
// Hoelder seminorms, Paley-Littlewood blocks, Besov B^alpha_{inf,inf} norms
// and the Dirichlet kernel.  All distances are measured in the circle metric.

#include <span>
#include <vector>

#include "roughspde/fourier.hpp"

namespace roughspde {

// exact max over all grid pairs of |u_i - u_j| / d(x_i, x_j)^alpha
double holder_seminorm(std::span<const double> u, double alpha);

struct HolderBracket {
  double lower;  // dyadic separations only
  double upper;  // chaining bound over binary expansions of the separation
};
// O(N log N) bracket of the exact grid seminorm
HolderBracket holder_bracket(std::span<const double> u, double alpha);

// block n carries the modes 2^{n-1} <= |k| < 2^n; block 0 is the mean
SpectralField pl_block(const SpectralField& psi, int n);
int pl_block_count(const SpectralField& psi);

struct PaleyLittlewoodDecomp {
  std::vector<SpectralField> blocks;
  SpectralField reconstruct() const;
};
PaleyLittlewoodDecomp pl_decompose(const SpectralField& psi);

// sup over resolved blocks of 2^{alpha n} |delta_n psi|_inf (max over components);
// for alpha < 0 this is a lower bound of the continuum norm, capped at the
// resolution reported by pl_block_count
double besov_norm(const SpectralField& psi, double alpha);

double dirichlet_kernel(int n, double x);
// numerical L^p norm of D_n on the circle (midpoint rule, `points` nodes)
double dirichlet_lp_norm(int n, double p, int points = 0);

struct HolderReport {
  double alpha;
  double seminorm;
  double sup_norm;
  double besov_norm;
  int grid_resolution;
  int resolved_blocks;
};
HolderReport holder_report(std::span<const double> samples, double alpha);

double sup_norm(std::span<const double> u);

}  // namespace roughspde

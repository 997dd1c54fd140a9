#pragma once
// Truncated tensor algebra over words, shuffles, Chen composition, lifts of
// sampled paths and compensated Riemann sums.
//
// Word convention: <X(s,t), e_{w1...wk}> integrates dX^{w1} innermost, i.e.
// over s < r1 < ... < rk < t.  Chen: <a (x) b, e_w> = sum_{w = uv} <a,e_u><b,e_v>,
// with a the earlier increment.  Letters are 0-based internally and printed
// 1-based.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "roughspde/fourier.hpp"
#include "roughspde/scheme.hpp"

namespace roughspde {

struct Word {
  std::vector<int> letters;

  Word() = default;
  Word(std::initializer_list<int> l) : letters(l) {}
  explicit Word(std::vector<int> l) : letters(std::move(l)) {}
  size_t size() const { return letters.size(); }
  bool empty() const { return letters.empty(); }
  Word operator+(const Word& o) const;
  auto operator<=>(const Word&) const = default;
  // letters 1-based, dot separated ("1.2"), "-" for the empty word
  std::string str() const;
  // letters as a,b,c,...
  std::string alpha_str() const;
  static Word from_alpha(const std::string& s);
};

// all order-preserving interleavings with multiplicity; empty when |w|+|v| > cap
std::map<Word, long long> shuffle(const Word& w, const Word& v, int cap = 1 << 20);

// all words over {0..n-1} of length exactly L, in index order
std::vector<Word> words_of_length(int n, int L);

class TensorElement {
 public:
  TensorElement() = default;
  TensorElement(int n, int p);  // zero element
  static TensorElement identity(int n, int p);
  // exp of a level-one increment: signature of a straight chord
  static TensorElement chord(std::span<const double> delta, int p);

  int alphabet() const { return n_; }
  int level_cap() const { return p_; }

  double operator[](const Word& w) const;
  double& operator[](const Word& w);
  // contiguous coefficient block of level L (n^L entries, word index order)
  std::span<double> level(int L) { return {c_.data() + off_[L], static_cast<size_t>(off_[L + 1] - off_[L])}; }
  std::span<const double> level(int L) const {
    return {c_.data() + off_[L], static_cast<size_t>(off_[L + 1] - off_[L])};
  }
  static size_t index(const Word& w, int n);

  TensorElement restrict_to(int p) const;
  // group inverse via the antipode: (-1)^{|w|} reversed words
  TensorElement inverse() const;
  std::vector<double>& raw() { return c_; }
  const std::vector<double>& raw() const { return c_; }

 private:
  int n_ = 0, p_ = 0;
  std::vector<size_t> off_;
  std::vector<double> c_;
  friend TensorElement chen_compose(const TensorElement&, const TensorElement&);
};

TensorElement chen_compose(const TensorElement& a, const TensorElement& b);
TensorElement operator*(const TensorElement& a, const TensorElement& b);
TensorElement operator-(const TensorElement& a, const TensorElement& b);
// max over word pairs with |w|+|v| <= p of |<g, w sh v> - <g,w><g,v>|
double shuffle_defect(const TensorElement& g);
double max_abs_diff(const TensorElement& a, const TensorElement& b);

// Rough path of a piecewise-linear path through samples.  Increments
// between any two sample indices come from a segment tree of per-step chord
// signatures, so no cancellation against a running signature occurs.
class GridRoughPath {
 public:
  // samples: (M+1) x n row-major; params strictly increasing; periodic adds
  // the closing step back to the first sample one period later
  GridRoughPath(std::vector<double> params, std::vector<double> samples, int n, int p, bool periodic = false,
                double period = 0.0);
  // lift a field on the circle grid (periodic, grid points as parameters)
  static GridRoughPath from_field(const std::vector<double>& samples, int n, int p);

  int alphabet() const { return n_; }
  int level_cap() const { return p_; }
  int steps() const { return m_; }
  int points() const { return static_cast<int>(params_.size()); }
  bool periodic() const { return periodic_; }
  double period() const { return period_; }
  double param(int i) const { return params_[i]; }
  double value(int i, int comp) const { return x_[static_cast<size_t>(i) * n_ + comp]; }
  double alpha = 0.0;  // regularity tag

  const TensorElement& one_step(int i) const { return tree_[leaf_ + i]; }
  // X(x_i, x_j) for sample indices i <= j (periodic: any i, j, going forward)
  TensorElement increment(int i, int j) const;
  // X(a, b) for parameters a <= b, with partial chords at off-grid ends;
  // periodic paths accept any a and b with a <= b (wrapping as needed)
  TensorElement increment_at(double a, double b) const;
  // path value at parameter a (piecewise linear)
  std::vector<double> value_at(double a) const;

 private:
  int locate(double a, double& frac) const;
  TensorElement query(int lo, int hi) const;  // product of steps lo..hi-1
  std::vector<double> params_, x_;
  int n_, p_, m_;
  bool periodic_;
  double period_;
  int leaf_ = 1;
  std::vector<TensorElement> tree_;
};

double integration_by_parts_check(const GridRoughPath& rp, int i, int j, int s, int t);

// <D_eps X(y), e_w> = (1/eps) sum_j c_j <X(y, y + eps z_j), e_w> at every grid point y
std::vector<double> d_eps_rough_values(const GridRoughPath& rp, const SignedAtomicMeasure& mu, double epsilon,
                                       const Word& w);
// same, for all words of one level at once: result[word index][point]
std::vector<std::vector<double>> d_eps_rough_level(const GridRoughPath& rp, const SignedAtomicMeasure& mu,
                                                   double epsilon, int level);
SpectralField d_eps_rough(const GridRoughPath& rp, const SignedAtomicMeasure& mu, double epsilon, const Word& w);

struct ResolutionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// scalar path controlled by rp: coefficient <Y(x_i), e_w> for |w| <= p-1
class ControlledPath {
 public:
  ControlledPath(std::shared_ptr<const GridRoughPath> base, int degree);
  const GridRoughPath& base() const { return *base_; }
  std::shared_ptr<const GridRoughPath> base_ptr() const { return base_; }
  int degree() const { return degree_; }  // max word length carried
  void set(int point, const Word& w, double v);
  double get(int point, const Word& w) const;
  // nonzero entries at a point: (level, index in level, value)
  struct Entry {
    int level;
    size_t index;
    double value;
  };
  const std::vector<Entry>& entries(int point) const { return coeff_[point]; }

 private:
  std::shared_ptr<const GridRoughPath> base_;
  int degree_;
  std::vector<std::vector<Entry>> coeff_;
};

// Xi_i(u,v) = sum_w <Y(u), e_w> <X(u,v), e_{w i}>
double compensated_term(const ControlledPath& Y, const TensorElement& incr, int point, int i);
// sum of Xi_i over the finest partition between sample indices s < t
double rough_integral(const ControlledPath& Y, const GridRoughPath& rp, int i, int s, int t);

// smooth matrix function G(u) with partial derivatives D^w G_ij
struct SmoothMatrixFunction {
  int n = 1;
  int max_order = 0;
  // value of d^{|w|} G_ij / du_{w1} ... du_{wk} at u
  std::function<double(std::span<const double> u, int i, int j, const Word& w)> deriv;
};

// controlled paths for every entry of G(u), row-major (i, j); coefficients
// <Y_ij(x), e_w> = D^w G_ij(u(x)) (unit constants C_w), |w| <= p-1
std::vector<ControlledPath> build_controlled_G(const GridRoughPath& u_path, std::shared_ptr<const GridRoughPath> rp,
                                               const SmoothMatrixFunction& G, int p);

// max over levels l <= p and dyadic grid separations of
// |<X(x,y) - Y(x,y)>_l| / d(x,y)^{l alpha}: dyadic lower bracket of the
// inhomogeneous rough-path distance
double rough_distance_dyadic(const GridRoughPath& a, const GridRoughPath& b, double alpha);

}  // namespace roughspde

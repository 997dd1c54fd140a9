#include "roughspde/rough.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace roughspde {

// ---------------------------------------------------------------- words

Word Word::operator+(const Word& o) const {
  Word r = *this;
  r.letters.insert(r.letters.end(), o.letters.begin(), o.letters.end());
  return r;
}

std::string Word::str() const {
  if (letters.empty()) return "-";
  std::string s;
  for (size_t i = 0; i < letters.size(); ++i) {
    if (i) s += '.';
    s += std::to_string(letters[i] + 1);
  }
  return s;
}

std::string Word::alpha_str() const {
  std::string s;
  for (int l : letters) s += static_cast<char>('a' + l);
  return s;
}

Word Word::from_alpha(const std::string& s) {
  Word w;
  for (char ch : s) w.letters.push_back(ch - 'a');
  return w;
}

namespace {

void shuffle_rec(const Word& w, size_t i, const Word& v, size_t j, Word& cur, std::map<Word, long long>& out) {
  if (i == w.size() && j == v.size()) {
    ++out[cur];
    return;
  }
  if (i < w.size()) {
    cur.letters.push_back(w.letters[i]);
    shuffle_rec(w, i + 1, v, j, cur, out);
    cur.letters.pop_back();
  }
  if (j < v.size()) {
    cur.letters.push_back(v.letters[j]);
    shuffle_rec(w, i, v, j + 1, cur, out);
    cur.letters.pop_back();
  }
}

size_t ipow(int n, int L) {
  size_t r = 1;
  for (int i = 0; i < L; ++i) r *= n;
  return r;
}

}  // namespace

std::map<Word, long long> shuffle(const Word& w, const Word& v, int cap) {
  std::map<Word, long long> out;
  if (static_cast<int>(w.size() + v.size()) > cap) return out;
  Word cur;
  shuffle_rec(w, 0, v, 0, cur, out);
  return out;
}

std::vector<Word> words_of_length(int n, int L) {
  std::vector<Word> out;
  size_t total = ipow(n, L);
  out.reserve(total);
  for (size_t idx = 0; idx < total; ++idx) {
    Word w;
    w.letters.resize(L);
    size_t r = idx;
    for (int i = L - 1; i >= 0; --i) {
      w.letters[i] = static_cast<int>(r % n);
      r /= n;
    }
    out.push_back(std::move(w));
  }
  return out;
}

// ---------------------------------------------------------------- tensors

TensorElement::TensorElement(int n, int p) : n_(n), p_(p) {
  if (n < 1 || p < 0) throw std::invalid_argument("tensor element needs n >= 1 and p >= 0");
  off_.resize(p + 2);
  off_[0] = 0;
  for (int L = 0; L <= p; ++L) off_[L + 1] = off_[L] + ipow(n, L);
  c_.assign(off_[p + 1], 0.0);
}

TensorElement TensorElement::identity(int n, int p) {
  TensorElement t(n, p);
  t.c_[0] = 1.0;
  return t;
}

TensorElement TensorElement::chord(std::span<const double> d, int p) {
  const int n = static_cast<int>(d.size());
  TensorElement t = identity(n, p);
  for (int L = 1; L <= p; ++L) {
    auto prev = t.level(L - 1);
    auto cur = t.level(L);
    const double inv = 1.0 / L;
    for (size_t i = 0; i < prev.size(); ++i)
      for (int j = 0; j < n; ++j) cur[i * n + j] = prev[i] * d[j] * inv;
  }
  return t;
}

size_t TensorElement::index(const Word& w, int n) {
  size_t idx = 0;
  for (int l : w.letters) {
    if (l < 0 || l >= n) throw std::out_of_range("letter outside alphabet");
    idx = idx * n + l;
  }
  return idx;
}

double TensorElement::operator[](const Word& w) const {
  if (static_cast<int>(w.size()) > p_) return 0.0;
  return c_[off_[w.size()] + index(w, n_)];
}

double& TensorElement::operator[](const Word& w) {
  if (static_cast<int>(w.size()) > p_) throw std::out_of_range("word longer than level cap");
  return c_[off_[w.size()] + index(w, n_)];
}

TensorElement TensorElement::restrict_to(int p) const {
  if (p > p_) throw std::invalid_argument("cannot extend truncation level");
  TensorElement t(n_, p);
  std::copy(c_.begin(), c_.begin() + t.c_.size(), t.c_.begin());
  return t;
}

TensorElement TensorElement::inverse() const {
  TensorElement t(n_, p_);
  for (int L = 0; L <= p_; ++L) {
    auto src = level(L);
    auto dst = t.level(L);
    const double sgn = L % 2 ? -1.0 : 1.0;
    for (size_t idx = 0; idx < src.size(); ++idx) {
      // reverse the base-n digits of idx
      size_t r = idx, rev = 0;
      for (int i = 0; i < L; ++i) {
        rev = rev * n_ + r % n_;
        r /= n_;
      }
      dst[rev] = sgn * src[idx];
    }
  }
  return t;
}

TensorElement chen_compose(const TensorElement& a, const TensorElement& b) {
  if (a.n_ != b.n_ || a.p_ != b.p_) throw std::invalid_argument("chen_compose: level cap or alphabet mismatch");
  TensorElement out(a.n_, a.p_);
  const int n = a.n_;
  for (int L = 0; L <= a.p_; ++L) {
    double* o = out.c_.data() + out.off_[L];
    for (int i = 0; i <= L; ++i) {
      const double* x = a.c_.data() + a.off_[i];
      const double* y = b.c_.data() + b.off_[L - i];
      const size_t nx = ipow(n, i), ny = ipow(n, L - i);
      for (size_t ix = 0; ix < nx; ++ix) {
        const double xv = x[ix];
        if (xv == 0.0) continue;
        double* orow = o + ix * ny;
        for (size_t iy = 0; iy < ny; ++iy) orow[iy] += xv * y[iy];
      }
    }
  }
  return out;
}

TensorElement operator*(const TensorElement& a, const TensorElement& b) { return chen_compose(a, b); }

TensorElement operator-(const TensorElement& a, const TensorElement& b) {
  if (a.alphabet() != b.alphabet() || a.level_cap() != b.level_cap()) throw std::invalid_argument("shape mismatch");
  TensorElement r = a;
  for (size_t i = 0; i < r.raw().size(); ++i) r.raw()[i] -= b.raw()[i];
  return r;
}

double max_abs_diff(const TensorElement& a, const TensorElement& b) {
  if (a.raw().size() != b.raw().size()) throw std::invalid_argument("shape mismatch");
  double d = 0;
  for (size_t i = 0; i < a.raw().size(); ++i) d = std::max(d, std::abs(a.raw()[i] - b.raw()[i]));
  return d;
}

double shuffle_defect(const TensorElement& g) {
  const int n = g.alphabet(), p = g.level_cap();
  double worst = 0.0;
  for (int lw = 1; lw < p; ++lw)
    for (int lv = 1; lw + lv <= p; ++lv)
      for (const auto& w : words_of_length(n, lw))
        for (const auto& v : words_of_length(n, lv)) {
          double s = 0.0;
          for (const auto& [u, mult] : shuffle(w, v)) s += mult * g[u];
          worst = std::max(worst, std::abs(s - g[w] * g[v]));
        }
  return worst;
}

// ---------------------------------------------------------------- rough paths

GridRoughPath::GridRoughPath(std::vector<double> params, std::vector<double> samples, int n, int p, bool periodic,
                             double period)
    : params_(std::move(params)), x_(std::move(samples)), n_(n), p_(p), periodic_(periodic), period_(period) {
  if (p < 1) throw std::invalid_argument("level cap p must be >= 1");
  if (n < 1) throw std::invalid_argument("dimension must be >= 1");
  const size_t pts = params_.size();
  if (x_.size() != pts * n) throw ShapeError("sample table does not match parameter count");
  if (pts < 2) throw ShapeError("need at least two samples");
  for (size_t i = 1; i < pts; ++i)
    if (!(params_[i] > params_[i - 1])) throw std::invalid_argument("parameters must be strictly increasing");
  for (double v : x_)
    if (!std::isfinite(v)) throw std::invalid_argument("samples must be finite");
  if (periodic_ && !(period_ > params_.back() - params_.front())) throw std::invalid_argument("bad period");
  m_ = static_cast<int>(periodic_ ? pts : pts - 1);
  while (leaf_ < m_) leaf_ *= 2;
  tree_.assign(2 * leaf_, TensorElement::identity(n_, p_));
  std::vector<double> d(n_);
  for (int i = 0; i < m_; ++i) {
    int j = (i + 1) % static_cast<int>(pts);
    for (int c = 0; c < n_; ++c) d[c] = value(j, c) - value(i, c);
    tree_[leaf_ + i] = TensorElement::chord(d, p_);
  }
  for (int i = leaf_ - 1; i >= 1; --i) tree_[i] = chen_compose(tree_[2 * i], tree_[2 * i + 1]);
}

GridRoughPath GridRoughPath::from_field(const std::vector<double>& samples, int n, int p) {
  const int N = static_cast<int>(samples.size() / n);
  // component-major field samples -> row-major path table
  std::vector<double> rows(samples.size());
  for (int j = 0; j < N; ++j)
    for (int c = 0; c < n; ++c) rows[static_cast<size_t>(j) * n + c] = samples[static_cast<size_t>(c) * N + j];
  CircleGrid g(N);
  return GridRoughPath(g.points(), std::move(rows), n, p, true, 2 * kPi);
}

TensorElement GridRoughPath::query(int lo, int hi) const {
  TensorElement left = TensorElement::identity(n_, p_), right = left;
  bool lset = false, rset = false;
  for (int l = lo + leaf_, r = hi + leaf_; l < r; l >>= 1, r >>= 1) {
    if (l & 1) {
      left = lset ? chen_compose(left, tree_[l]) : tree_[l];
      lset = true;
      ++l;
    }
    if (r & 1) {
      --r;
      right = rset ? chen_compose(tree_[r], right) : tree_[r];
      rset = true;
    }
  }
  if (!lset) return right;
  if (!rset) return left;
  return chen_compose(left, right);
}

TensorElement GridRoughPath::increment(int i, int j) const {
  const int pts = points();
  if (i < 0 || j < 0 || i >= pts + periodic_ || j >= pts + periodic_) throw std::out_of_range("sample index");
  if (periodic_) {
    i %= pts;
    j %= pts;
    if (i <= j) return query(i, j);
    return chen_compose(query(i, m_), query(0, j));
  }
  if (i > j) return query(j, i).inverse();
  return query(i, j);
}

int GridRoughPath::locate(double a, double& frac) const {
  // step s covers [params_[s], params_[s+1]] (closing step ends at params_[0] + period)
  auto end_of = [&](int s) { return s + 1 < points() ? params_[s + 1] : params_[0] + period_; };
  int s = static_cast<int>(std::upper_bound(params_.begin(), params_.end(), a) - params_.begin()) - 1;
  s = std::clamp(s, 0, m_ - 1);
  double lo = params_[s], hi = end_of(s);
  frac = std::clamp((a - lo) / (hi - lo), 0.0, 1.0);
  return s;
}

std::vector<double> GridRoughPath::value_at(double a) const {
  if (periodic_) a = params_[0] + std::fmod(std::fmod(a - params_[0], period_) + period_, period_);
  double f;
  int s = locate(a, f);
  int j = (s + 1) % points();
  std::vector<double> v(n_);
  for (int c = 0; c < n_; ++c) v[c] = value(s, c) + f * (value(j, c) - value(s, c));
  return v;
}

TensorElement GridRoughPath::increment_at(double a, double b) const {
  if (b < a) return increment_at(b, a).inverse();
  double shift = 0.0;
  if (periodic_) {
    double r = std::fmod(std::fmod(a - params_[0], period_) + period_, period_);
    shift = params_[0] + r - a;
  } else if (a < params_.front() - 1e-12 || b > params_.back() + 1e-12) {
    throw std::out_of_range("increment outside the parameter range");
  }
  a += shift;
  b += shift;
  TensorElement acc = TensorElement::identity(n_, p_);
  std::vector<double> d(n_);
  auto step_delta = [&](int s, double f0, double f1) {
    int j = (s + 1) % points();
    for (int c = 0; c < n_; ++c) d[c] = (f1 - f0) * (value(j, c) - value(s, c));
  };
  while (true) {
    double fa;
    int sa = locate(a, fa);
    double limit = periodic_ ? params_[0] + period_ : params_.back();
    if (b <= limit || !periodic_) {
      double fb;
      int sb = locate(std::min(b, limit), fb);
      if (sa == sb) {
        step_delta(sa, fa, fb);
        return chen_compose(acc, TensorElement::chord(d, p_));
      }
      step_delta(sa, fa, 1.0);
      acc = chen_compose(acc, TensorElement::chord(d, p_));
      if (sb > sa + 1) acc = chen_compose(acc, query(sa + 1, sb));
      step_delta(sb, 0.0, fb);
      return chen_compose(acc, TensorElement::chord(d, p_));
    }
    // wrap: run to the end of the period and continue from the start
    step_delta(sa, fa, 1.0);
    acc = chen_compose(acc, TensorElement::chord(d, p_));
    if (sa + 1 < m_) acc = chen_compose(acc, query(sa + 1, m_));
    a = params_[0];
    b -= period_;
  }
}

double integration_by_parts_check(const GridRoughPath& rp, int i, int j, int s, int t) {
  if (rp.level_cap() < 2) throw std::invalid_argument("integration by parts needs level 2");
  auto x = rp.increment(s, t);
  double lhs = x[Word{i, j}] + x[Word{j, i}];
  double rhs = x[Word{i}] * x[Word{j}];
  return std::abs(lhs - rhs);
}

std::vector<std::vector<double>> d_eps_rough_level(const GridRoughPath& rp, const SignedAtomicMeasure& mu,
                                                   double epsilon, int level) {
  if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be positive");
  if (level < 1 || level > rp.level_cap()) throw std::invalid_argument("level outside 1..p");
  const int pts = rp.points();
  double h = INFINITY;
  for (int i = 0; i + 1 < pts; ++i) h = std::min(h, rp.param(i + 1) - rp.param(i));
  if (rp.periodic()) h = std::min(h, rp.param(0) + rp.period() - rp.param(pts - 1));
  for (const auto& a : mu.atoms)
    if (a.y != 0 && epsilon * std::abs(a.y) < h) {
      std::ostringstream os;
      os << "lift grid spacing " << h << " is coarser than the shift eps*|z| = " << epsilon * std::abs(a.y);
      throw ResolutionError(os.str());
    }
  const size_t nw = ipow(rp.alphabet(), level);
  std::vector<std::vector<double>> out(nw, std::vector<double>(pts, 0.0));
  for (int i = 0; i < pts; ++i) {
    const double y = rp.param(i);
    for (const auto& a : mu.atoms) {
      if (a.y == 0) continue;  // X(y,y) is the identity: no contribution at level >= 1
      auto inc = rp.increment_at(y, y + epsilon * a.y);
      auto lv = inc.level(level);
      for (size_t w = 0; w < nw; ++w) out[w][i] += a.c * lv[w] / epsilon;
    }
  }
  return out;
}

std::vector<double> d_eps_rough_values(const GridRoughPath& rp, const SignedAtomicMeasure& mu, double epsilon,
                                       const Word& w) {
  if (w.empty()) return std::vector<double>(rp.points(), 0.0);
  auto all = d_eps_rough_level(rp, mu, epsilon, static_cast<int>(w.size()));
  return all[TensorElement::index(w, rp.alphabet())];
}

SpectralField d_eps_rough(const GridRoughPath& rp, const SignedAtomicMeasure& mu, double epsilon, const Word& w) {
  if (!rp.periodic() || rp.points() % 2) throw std::invalid_argument("d_eps_rough needs a lift on an even circle grid");
  auto v = d_eps_rough_values(rp, mu, epsilon, w);
  return transform(v, CircleGrid(rp.points()));
}

// ---------------------------------------------------------------- controlled paths

ControlledPath::ControlledPath(std::shared_ptr<const GridRoughPath> base, int degree)
    : base_(std::move(base)), degree_(degree) {
  if (!base_) throw std::invalid_argument("controlled path needs a base rough path");
  if (degree < 0 || degree >= base_->level_cap()) throw std::invalid_argument("degree must be below the level cap");
  coeff_.resize(base_->points());
}

void ControlledPath::set(int point, const Word& w, double v) {
  if (static_cast<int>(w.size()) > degree_) throw std::invalid_argument("word longer than controlled degree");
  const int L = static_cast<int>(w.size());
  const size_t idx = TensorElement::index(w, base_->alphabet());
  for (auto& e : coeff_.at(point))
    if (e.level == L && e.index == idx) {
      e.value = v;
      return;
    }
  if (v != 0.0) coeff_[point].push_back({L, idx, v});
}

double ControlledPath::get(int point, const Word& w) const {
  const int L = static_cast<int>(w.size());
  const size_t idx = TensorElement::index(w, base_->alphabet());
  for (const auto& e : coeff_.at(point))
    if (e.level == L && e.index == idx) return e.value;
  return 0.0;
}

double compensated_term(const ControlledPath& Y, const TensorElement& incr, int point, int i) {
  const int n = incr.alphabet();
  double s = 0.0;
  for (const auto& e : Y.entries(point)) s += e.value * incr.level(e.level + 1)[e.index * n + i];
  return s;
}

double rough_integral(const ControlledPath& Y, const GridRoughPath& rp, int i, int s, int t) {
  if (&Y.base() != &rp && (Y.base().points() != rp.points() || Y.base().alphabet() != rp.alphabet()))
    throw std::invalid_argument("controlled path and rough path live on different grids");
  if (s < 0 || t > rp.steps() || s > t) throw std::out_of_range("integration bounds");
  if (i < 0 || i >= rp.alphabet()) throw std::out_of_range("letter");
  double sum = 0.0;
  for (int u = s; u < t; ++u) sum += compensated_term(Y, rp.one_step(u), u % rp.points(), i);
  return sum;
}

std::vector<ControlledPath> build_controlled_G(const GridRoughPath& u_path, std::shared_ptr<const GridRoughPath> rp,
                                               const SmoothMatrixFunction& G, int p) {
  if (!rp) throw std::invalid_argument("missing rough path");
  if (G.max_order < p - 1) throw std::invalid_argument("G derivatives available to order " + std::to_string(G.max_order) +
                                                       ", need " + std::to_string(p - 1));
  if (u_path.points() != rp->points()) throw std::invalid_argument("u and rough path on different grids");
  const int n = G.n;
  if (u_path.alphabet() != n || rp->alphabet() != n) throw std::invalid_argument("dimension mismatch");
  std::vector<ControlledPath> out;
  for (int k = 0; k < n * n; ++k) out.emplace_back(rp, p - 1);
  std::vector<std::vector<Word>> words(p);
  for (int L = 0; L < p; ++L) words[L] = words_of_length(n, L);
  std::vector<double> u(n);
  for (int x = 0; x < rp->points(); ++x) {
    for (int c = 0; c < n; ++c) u[c] = u_path.value(x, c);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int L = 0; L < p; ++L)
          for (const auto& w : words[L]) out[i * n + j].set(x, w, G.deriv(u, i, j, w));
  }
  return out;
}

double rough_distance_dyadic(const GridRoughPath& a, const GridRoughPath& b, double alpha) {
  if (a.points() != b.points() || a.alphabet() != b.alphabet() || a.level_cap() != b.level_cap())
    throw std::invalid_argument("rough paths must share grid, alphabet and level");
  const int pts = a.points();
  const int reach = a.periodic() ? pts / 2 : pts - 1;
  const double h = (a.periodic() ? a.period() : a.param(pts - 1) - a.param(0)) / (a.periodic() ? pts : pts - 1);
  std::vector<TensorElement> xa, xb;
  const int count = a.periodic() ? pts : a.steps();
  for (int i = 0; i < count; ++i) {
    xa.push_back(a.one_step(i));
    xb.push_back(b.one_step(i));
  }
  double best = 0.0;
  for (int sep = 1; sep <= reach; sep *= 2) {
    const int starts = a.periodic() ? pts : pts - sep;
    for (int i = 0; i < starts; ++i)
      for (int L = 1; L <= a.level_cap(); ++L) {
        auto la = xa[i].level(L), lb = xb[i].level(L);
        double d = 0;
        for (size_t w = 0; w < la.size(); ++w) d = std::max(d, std::abs(la[w] - lb[w]));
        best = std::max(best, d / std::pow(sep * h, L * alpha));
      }
    if (2 * sep > reach) break;
    // double the separation: X(i, i+2s) = X(i, i+s) (x) X(i+s, i+2s)
    const int next = a.periodic() ? pts : pts - 2 * sep;
    std::vector<TensorElement> na, nb;
    for (int i = 0; i < next; ++i) {
      int j = a.periodic() ? (i + sep) % pts : i + sep;
      na.push_back(chen_compose(xa[i], xa[j]));
      nb.push_back(chen_compose(xb[i], xb[j]));
    }
    xa = std::move(na);
    xb = std::move(nb);
  }
  return best;
}

}  // namespace roughspde

#include "psilab/jet.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <utility>

#include "psilab/errors.hpp"

namespace psilab {

namespace {

constexpr int kKeyBits = 6;  // per-variable degree < 64

std::uint64_t key_of(const MultiIndex& g) {
  std::uint64_t k = 0;
  for (int v : g) k = (k << kKeyBits) | static_cast<std::uint64_t>(v);
  return k;
}

void enumerate_degree(int nvars, int degree, int var, MultiIndex& cur,
                      std::vector<MultiIndex>& out) {
  if (var == nvars - 1) {
    cur[var] = degree;
    out.push_back(cur);
    return;
  }
  for (int k = degree; k >= 0; --k) {
    cur[var] = k;
    enumerate_degree(nvars, degree - k, var + 1, cur, out);
  }
  cur[var] = 0;
}

// Dense n×n column-major accumulate: c += a * b
inline void gemm_acc(int n, const cplx* a, const cplx* b, cplx* c) {
  if (n == 1) {
    c[0] += a[0] * b[0];
    return;
  }
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      const cplx bkj = b[k + j * n];
      if (bkj == cplx(0.0)) continue;
      for (int i = 0; i < n; ++i) c[i + j * n] += a[i + k * n] * bkj;
    }
}

}  // namespace

std::vector<MultiIndex> indices_of_degree(int length, int degree) {
  std::vector<MultiIndex> out;
  if (length == 0) {
    if (degree == 0) out.emplace_back();
    return out;
  }
  MultiIndex cur(length, 0);
  enumerate_degree(length, degree, 0, cur, out);
  return out;
}

JetLayout::JetLayout(int nvars, int order) : nvars_(nvars), order_(order) {
  if (nvars <= 0 || order < 0) throw ConfigurationError("JetLayout: bad shape");
  if (order >= (1 << kKeyBits) || nvars * kKeyBits > 64)
    throw ConfigurationError("JetLayout: order or variable count too large");
  for (int k = 0; k <= order; ++k) {
    auto deg = indices_of_degree(nvars, k);
    terms_.insert(terms_.end(), deg.begin(), deg.end());
  }
  std::vector<std::pair<std::uint64_t, std::uint32_t>> kp;
  kp.reserve(terms_.size());
  for (std::size_t t = 0; t < terms_.size(); ++t)
    kp.emplace_back(key_of(terms_[t]), static_cast<std::uint32_t>(t));
  std::sort(kp.begin(), kp.end());
  for (auto& [k, p] : kp) {
    keys_.push_back(k);
    key_pos_.push_back(p);
  }

  std::vector<int> deg(terms_.size());
  for (std::size_t t = 0; t < terms_.size(); ++t)
    deg[t] = std::accumulate(terms_[t].begin(), terms_[t].end(), 0);
  MultiIndex sum(nvars);
  for (std::size_t a = 0; a < terms_.size(); ++a)
    for (std::size_t b = 0; b < terms_.size(); ++b) {
      if (deg[a] + deg[b] > order) continue;
      for (int v = 0; v < nvars; ++v) sum[v] = terms_[a][v] + terms_[b][v];
      products_.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b),
                           static_cast<std::uint32_t>(index_of(sum))});
    }

  derivative_.resize(nvars);
  for (int v = 0; v < nvars; ++v)
    for (std::size_t t = 0; t < terms_.size(); ++t) {
      if (terms_[t][v] == 0) continue;
      MultiIndex lower = terms_[t];
      lower[v] -= 1;
      derivative_[v].push_back({static_cast<std::uint32_t>(t),
                                static_cast<std::uint32_t>(index_of(lower)),
                                static_cast<double>(terms_[t][v])});
    }
}

const JetLayout& JetLayout::get(int nvars, int order) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<JetLayout>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{nvars, order}];
  if (!slot) slot.reset(new JetLayout(nvars, order));
  return *slot;
}

std::ptrdiff_t JetLayout::index_of(const MultiIndex& gamma) const {
  if (static_cast<int>(gamma.size()) != nvars_) return -1;
  int total = 0;
  for (int v : gamma) {
    if (v < 0) return -1;
    total += v;
  }
  if (total > order_) return -1;
  const std::uint64_t k = key_of(gamma);
  auto it = std::lower_bound(keys_.begin(), keys_.end(), k);
  if (it == keys_.end() || *it != k) return -1;
  return key_pos_[it - keys_.begin()];
}

Jet::Jet(int nvars, int order, int n)
    : layout_(&JetLayout::get(nvars, order)),
      n_(n),
      coeffs_(layout_->size() * static_cast<std::size_t>(n) * n, cplx(0.0)) {
  if (n <= 0) throw ConfigurationError("Jet: matrix dimension must be positive");
}

Jet Jet::constant(int nvars, int order, const CMatrix& value) {
  if (value.rows() != value.cols()) throw ConfigurationError("Jet::constant: not square");
  Jet j(nvars, order, static_cast<int>(value.rows()));
  std::copy(value.data(), value.data() + value.size(), j.block(0));
  return j;
}

Jet Jet::scalar(int nvars, int order, cplx value) {
  Jet j(nvars, order, 1);
  j.coeffs_[0] = value;
  return j;
}

Jet Jet::variable(int nvars, int order, int var, double value) {
  Jet j = scalar(nvars, order, value);
  if (order >= 1) {
    MultiIndex e(nvars, 0);
    e[var] = 1;
    j.coeffs_[j.layout_->index_of(e)] = 1.0;
  }
  return j;
}

CMatrix Jet::coefficient(std::size_t t) const {
  CMatrix m(n_, n_);
  std::copy(block(t), block(t) + n_ * n_, m.data());
  return m;
}

CMatrix Jet::partial(const MultiIndex& gamma) const {
  const std::ptrdiff_t t = layout_->index_of(gamma);
  if (t < 0) {
    throw JetOrderError("Jet::partial: derivative order exceeds jet order " +
                        std::to_string(order()));
  }
  return coefficient(static_cast<std::size_t>(t)) * factorial(gamma);
}

Jet Jet::truncated(int order) const {
  if (order > this->order()) throw JetOrderError("Jet::truncated: cannot raise order");
  if (order == this->order()) return *this;
  Jet out(nvars(), order, n_);
  std::copy(coeffs_.begin(), coeffs_.begin() + out.coeffs_.size(), out.coeffs_.begin());
  return out;
}

Jet Jet::derivative(int var) const {
  if (order() == 0) throw JetOrderError("Jet::derivative: jet has order 0");
  Jet out(nvars(), order() - 1, n_);
  const int nn = n_ * n_;
  for (const auto& s : layout_->derivative(var))
    for (int e = 0; e < nn; ++e) out.block(s.dst)[e] += s.factor * block(s.src)[e];
  return out;
}

Jet Jet::adjoint() const {
  Jet out(nvars(), order(), n_);
  for (std::size_t t = 0; t < terms(); ++t)
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) out.block(t)[j + i * n_] = std::conj(block(t)[i + j * n_]);
  return out;
}

Jet Jet::broadcast(int n) const {
  if (n_ == n) return *this;
  if (n_ != 1) throw ConfigurationError("Jet::broadcast: only scalar jets broadcast");
  Jet out(nvars(), order(), n);
  for (std::size_t t = 0; t < terms(); ++t)
    for (int i = 0; i < n; ++i) out.block(t)[i + i * n] = block(t)[0];
  return out;
}

Jet& Jet::operator+=(const Jet& other) {
  if (empty()) return *this = other;
  if (other.empty()) return *this;
  if (other.nvars() != nvars()) throw ConfigurationError("Jet: variable count mismatch");
  if (other.order() < order()) *this = truncated(other.order());
  if (n_ != other.n_) {
    if (n_ == 1) *this = broadcast(other.n_);
    else return *this += other.broadcast(n_);
  }
  const std::size_t len = coeffs_.size();
  for (std::size_t e = 0; e < len; ++e) coeffs_[e] += other.coeffs_[e];
  return *this;
}

Jet& Jet::operator-=(const Jet& other) { return *this += -1.0 * Jet(other); }

Jet& Jet::operator*=(cplx s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
  if (a.nvars() != b.nvars()) throw ConfigurationError("Jet: variable count mismatch");
  const int order = std::min(a.order(), b.order());
  if (a.n_ != b.n_) {
    if (a.n_ == 1) return a.broadcast(b.n_) * b;
    if (b.n_ == 1) return a * b.broadcast(a.n_);
    throw ConfigurationError("Jet: matrix dimension mismatch");
  }
  Jet out(a.nvars(), order, a.n_);
  const JetLayout& lay = JetLayout::get(a.nvars(), order);
  for (const auto& p : lay.products()) gemm_acc(a.n_, a.block(p.a), b.block(p.b), out.block(p.c));
  return out;
}

Jet operator*(const CMatrix& m, const Jet& a) {
  if (a.n_ == 1 && m.rows() > 1) return m * a.broadcast(static_cast<int>(m.rows()));
  Jet out(a.nvars(), a.order(), a.n_);
  for (std::size_t t = 0; t < a.terms(); ++t) {
    Eigen::Map<const CMatrix> src(a.block(t), a.n_, a.n_);
    Eigen::Map<CMatrix> dst(out.block(t), a.n_, a.n_);
    dst.noalias() = m * src;
  }
  return out;
}

Jet operator*(const Jet& a, const CMatrix& m) {
  if (a.n_ == 1 && m.rows() > 1) return a.broadcast(static_cast<int>(m.rows())) * m;
  Jet out(a.nvars(), a.order(), a.n_);
  for (std::size_t t = 0; t < a.terms(); ++t) {
    Eigen::Map<const CMatrix> src(a.block(t), a.n_, a.n_);
    Eigen::Map<CMatrix> dst(out.block(t), a.n_, a.n_);
    dst.noalias() = src * m;
  }
  return out;
}

Jet Jet::inverse() const {
  const CMatrix f0 = value();
  Eigen::FullPivLU<CMatrix> lu(f0);
  if (!lu.isInvertible()) throw DomainError("Jet::inverse: constant coefficient is singular");
  const CMatrix g0 = lu.inverse();
  Jet h = *this;
  std::fill(h.block(0), h.block(0) + n_ * n_, cplx(0.0));
  const Jet x = -1.0 * (g0 * h);
  Jet sum = Jet::constant(nvars(), order(), CMatrix::Identity(n_, n_));
  Jet power = sum;
  for (int k = 1; k <= order(); ++k) {
    power = power * x;
    sum += power;
  }
  return sum * g0;
}

Jet Jet::compose(std::span<const cplx> derivatives) const {
  if (n_ != 1) throw ConfigurationError("Jet::compose: scalar jets only");
  if (static_cast<int>(derivatives.size()) < order() + 1)
    throw JetOrderError("Jet::compose: not enough derivatives supplied");
  Jet h = *this;
  h.coeffs_[0] = 0.0;
  Jet out = Jet::scalar(nvars(), order(), derivatives[0]);
  Jet power = Jet::scalar(nvars(), order(), 1.0);
  double fact = 1.0;
  for (int k = 1; k <= order(); ++k) {
    power = power * h;
    fact *= k;
    out += (derivatives[k] / fact) * power;
  }
  return out;
}

Jet exp(const Jet& f) {
  const cplx e = std::exp(f.value()(0, 0));
  std::vector<cplx> d(f.order() + 1, e);
  return f.compose(d);
}

Jet log(const Jet& f) {
  const cplx w = f.value()(0, 0);
  std::vector<cplx> d(f.order() + 1);
  d[0] = std::log(w);
  double fact = 1.0;
  for (int k = 1; k <= f.order(); ++k) {
    d[k] = ((k % 2 == 1) ? 1.0 : -1.0) * fact / std::pow(w, k);
    fact *= k;
  }
  return f.compose(d);
}

Jet pow(const Jet& f, cplx s) {
  const cplx w = f.value()(0, 0);
  if (w == cplx(0.0)) throw DomainError("pow(Jet): expansion point at zero");
  std::vector<cplx> d(f.order() + 1);
  cplx falling = 1.0;
  for (int k = 0; k <= f.order(); ++k) {
    d[k] = falling * std::pow(w, s - static_cast<double>(k));
    falling *= (s - static_cast<double>(k));
  }
  return f.compose(d);
}

Jet sqrt(const Jet& f) { return pow(f, 0.5); }

Jet reciprocal(const Jet& f) {
  const cplx w = f.value()(0, 0);
  std::vector<cplx> d(f.order() + 1);
  double fact = 1.0;
  for (int k = 0; k <= f.order(); ++k) {
    if (k > 0) fact *= k;
    d[k] = ((k % 2 == 0) ? 1.0 : -1.0) * fact / std::pow(w, k + 1);
  }
  return f.compose(d);
}

Jet sin(const Jet& f) {
  const cplx w = f.value()(0, 0);
  const cplx cyc[4] = {std::sin(w), std::cos(w), -std::sin(w), -std::cos(w)};
  std::vector<cplx> d(f.order() + 1);
  for (int k = 0; k <= f.order(); ++k) d[k] = cyc[k % 4];
  return f.compose(d);
}

Jet cos(const Jet& f) {
  const cplx w = f.value()(0, 0);
  const cplx cyc[4] = {std::cos(w), -std::sin(w), -std::cos(w), std::sin(w)};
  std::vector<cplx> d(f.order() + 1);
  for (int k = 0; k <= f.order(); ++k) d[k] = cyc[k % 4];
  return f.compose(d);
}

JetPoint::JetPoint(std::span<const double> xs, std::span<const double> xis, int order_)
    : order(order_) {
  if (xs.size() != xis.size()) throw ConfigurationError("JetPoint: x and xi dimensions differ");
  const int d = static_cast<int>(xs.size());
  for (int i = 0; i < d; ++i) x.push_back(Jet::variable(2 * d, order, i, xs[i]));
  for (int i = 0; i < d; ++i) xi.push_back(Jet::variable(2 * d, order, d + i, xis[i]));
}

Jet JetPoint::xi_norm2() const {
  Jet s = constant(0.0);
  for (const auto& v : xi) s += v * v;
  return s;
}

Jet JetPoint::x_norm2() const {
  Jet s = constant(0.0);
  for (const auto& v : x) s += v * v;
  return s;
}

MultiIndex phase_index(std::span<const int> alpha_xi, std::span<const int> beta_x) {
  MultiIndex g;
  g.insert(g.end(), beta_x.begin(), beta_x.end());
  g.insert(g.end(), alpha_xi.begin(), alpha_xi.end());
  return g;
}

double factorial(const MultiIndex& gamma) {
  double f = 1.0;
  for (int v : gamma)
    for (int k = 2; k <= v; ++k) f *= k;
  return f;
}

}  // namespace psilab

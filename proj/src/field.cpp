#include "psilab/field.hpp"

#include <algorithm>
#include <cmath>

#include "psilab/errors.hpp"

namespace psilab {

bool Box::contains(std::span<const double> x) const {
  for (int i = 0; i < d(); ++i)
    if (x[i] < lo[i] || x[i] > hi[i]) return false;
  return true;
}

double Box::volume() const {
  double v = 1.0;
  for (int i = 0; i < d(); ++i) v *= hi[i] - lo[i];
  return v;
}

double Box::diameter() const {
  double s = 0.0;
  for (int i = 0; i < d(); ++i) s = std::max(s, hi[i] - lo[i]);
  return s;
}

Box Box::cube(int d, double half_width, double center) {
  return Box{std::vector<double>(d, center - half_width), std::vector<double>(d, center + half_width)};
}

Box Box::hull(const Box& a, const Box& b) {
  Box out = a;
  for (int i = 0; i < a.d(); ++i) {
    out.lo[i] = std::min(a.lo[i], b.lo[i]);
    out.hi[i] = std::max(a.hi[i], b.hi[i]);
  }
  return out;
}

Field::Field(int d, int n, JetFn jet, ValueFn value, std::optional<Box> support)
    : d_(d), n_(n), jet_(std::move(jet)), value_(std::move(value)), support_(std::move(support)) {
  if (d <= 0 || n <= 0) throw ConfigurationError("Field: dimensions must be positive");
}

Field Field::operator*(const CMatrix& m) const {
  if (m.rows() != m.cols() || (n_ != 1 && m.rows() != n_))
    throw ConfigurationError("Field * matrix: dimension mismatch");
  auto self = *this;
  return Field(
      d_, static_cast<int>(m.rows()), [self, m](const JetPoint& p) { return self.jet(p) * m; },
      [self, m](std::span<const double> x) -> CMatrix {
        const CMatrix v = self(x);
        return v.size() == 1 ? CMatrix(v(0, 0) * m) : CMatrix(v * m);
      },
      support_);
}

Field Field::operator*(const Field& g) const {
  if (g.d_ != d_) throw ConfigurationError("Field product: dimension mismatch");
  auto f = *this;
  std::optional<Box> supp = support_ ? support_ : g.support_;
  if (support_ && g.support_) {
    Box b = *support_;
    for (int i = 0; i < d_; ++i) {
      b.lo[i] = std::max(support_->lo[i], g.support_->lo[i]);
      b.hi[i] = std::min(support_->hi[i], g.support_->hi[i]);
    }
    supp = b;
  }
  return Field(
      d_, std::max(n_, g.n_), [f, g](const JetPoint& p) { return f.jet(p) * g.jet(p); },
      [f, g](std::span<const double> x) -> CMatrix {
        const CMatrix a = f(x), b = g(x);
        if (a.size() == 1) return a(0, 0) * b;
        if (b.size() == 1) return a * b(0, 0);
        return a * b;
      },
      supp);
}

Field Field::operator+(const Field& g) const {
  if (g.d_ != d_) throw ConfigurationError("Field sum: dimension mismatch");
  auto f = *this;
  std::optional<Box> supp;
  if (support_ && g.support_) supp = Box::hull(*support_, *g.support_);
  const int n = std::max(n_, g.n_);
  return Field(
      d_, n, [f, g](const JetPoint& p) { return f.jet(p) + g.jet(p); },
      [f, g, n](std::span<const double> x) -> CMatrix {
        CMatrix a = f(x), b = g(x);
        if (a.size() == 1 && n > 1) a = a(0, 0) * CMatrix::Identity(n, n);
        if (b.size() == 1 && n > 1) b = b(0, 0) * CMatrix::Identity(n, n);
        return a + b;
      },
      supp);
}

Field Field::operator*(double s) const { return (*this) * CMatrix::Constant(1, 1, s); }

Field Field::adjoint() const {
  auto f = *this;
  return Field(
      d_, n_, [f](const JetPoint& p) { return f.jet(p).adjoint(); },
      [f](std::span<const double> x) -> CMatrix { return f(x).adjoint(); }, support_);
}

namespace fields {

namespace {

std::vector<double> center_or_zero(int d, std::vector<double> c) {
  if (c.empty()) c.assign(d, 0.0);
  if (static_cast<int>(c.size()) != d) throw ConfigurationError("field center has wrong dimension");
  return c;
}

double bump1(double w) {  // exp(1 − 1/(1 − w)) for 0 ≤ w < 1
  if (w >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - w));
}

Jet bump_jet(const Jet& w) {
  if (w.value()(0, 0).real() >= 1.0) return Jet(w.nvars(), w.order(), 1);
  const Jet one = Jet::scalar(w.nvars(), w.order(), 1.0);
  return exp(one - reciprocal(one - w));
}

}  // namespace

Field constant(int d, const CMatrix& m) {
  return Field(
      d, static_cast<int>(m.rows()), [m](const JetPoint& p) { return p.constant(m); },
      [m](std::span<const double>) { return m; });
}

Field constant(int d, double v) { return constant(d, CMatrix::Constant(1, 1, v)); }

Field radial_bump(int d, double radius, std::vector<double> center) {
  center = center_or_zero(d, center);
  Box supp;
  for (int i = 0; i < d; ++i) {
    supp.lo.push_back(center[i] - radius);
    supp.hi.push_back(center[i] + radius);
  }
  const double r2 = radius * radius;
  return Field(
      d, 1,
      [center, r2](const JetPoint& p) {
        Jet w = p.constant(0.0);
        for (int i = 0; i < p.d(); ++i) {
          const Jet dx = p.x[i] - p.constant(center[i]);
          w += dx * dx;
        }
        return bump_jet((1.0 / r2) * w);
      },
      [center, r2](std::span<const double> x) {
        double w = 0.0;
        for (std::size_t i = 0; i < center.size(); ++i) w += (x[i] - center[i]) * (x[i] - center[i]);
        return CMatrix::Constant(1, 1, bump1(w / r2));
      },
      supp);
}

Field tensor_bump(int d, double half_width, std::vector<double> center) {
  center = center_or_zero(d, center);
  Box supp;
  for (int i = 0; i < d; ++i) {
    supp.lo.push_back(center[i] - half_width);
    supp.hi.push_back(center[i] + half_width);
  }
  const double h2 = half_width * half_width;
  return Field(
      d, 1,
      [center, h2](const JetPoint& p) {
        Jet out = p.constant(1.0);
        for (int i = 0; i < p.d(); ++i) {
          const Jet dx = p.x[i] - p.constant(center[i]);
          out = out * bump_jet((1.0 / h2) * (dx * dx));
        }
        return out;
      },
      [center, h2](std::span<const double> x) {
        double v = 1.0;
        for (std::size_t i = 0; i < center.size(); ++i)
          v *= bump1((x[i] - center[i]) * (x[i] - center[i]) / h2);
        return CMatrix::Constant(1, 1, v);
      },
      supp);
}

Field gaussian(int d, double width, std::vector<double> center) {
  center = center_or_zero(d, center);
  const double s = 1.0 / (2.0 * width * width);
  return Field(
      d, 1,
      [center, s](const JetPoint& p) {
        Jet w = p.constant(0.0);
        for (int i = 0; i < p.d(); ++i) {
          const Jet dx = p.x[i] - p.constant(center[i]);
          w += dx * dx;
        }
        return exp(-s * w);
      },
      [center, s](std::span<const double> x) {
        double w = 0.0;
        for (std::size_t i = 0; i < center.size(); ++i) w += (x[i] - center[i]) * (x[i] - center[i]);
        return CMatrix::Constant(1, 1, std::exp(-s * w));
      });
}

Field cosine_mode(int d, double L, std::vector<int> q) {
  if (static_cast<int>(q.size()) != d) throw ConfigurationError("cosine_mode: wrong q length");
  return Field(
      d, 1,
      [L, q](const JetPoint& p) {
        Jet out = p.constant(1.0);
        for (int i = 0; i < p.d(); ++i) out = out * cos((2.0 * kPi * q[i] / L) * p.x[i]);
        return out;
      },
      [L, q](std::span<const double> x) {
        double v = 1.0;
        for (std::size_t i = 0; i < q.size(); ++i) v *= std::cos(2.0 * kPi * q[i] * x[i] / L);
        return CMatrix::Constant(1, 1, v);
      });
}

Field coordinate(int d, int axis) {
  return Field(
      d, 1, [axis](const JetPoint& p) { return p.x[axis]; },
      [axis](std::span<const double> x) { return CMatrix::Constant(1, 1, x[axis]); });
}

}  // namespace fields

}  // namespace psilab

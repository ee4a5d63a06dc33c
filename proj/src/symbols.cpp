#include "psilab/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "psilab/errors.hpp"

namespace psilab {

MatrixAlgebraSpec::MatrixAlgebraSpec(int n_) : n(n_) {
  if (n < 1) throw ConfigurationError("MatrixAlgebraSpec: n must be at least 1");
}

namespace cutoff {

namespace {
double h(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }
}  // namespace

double psi(double r) {
  if (r <= 0.5) return 0.0;
  if (r >= 1.0) return 1.0;
  const double a = h(2.0 * r - 1.0);
  const double b = h(2.0 - 2.0 * r);
  return a / (a + b);
}

double phi(std::span<const double> xi) {
  double r2 = 0.0;
  for (double v : xi) r2 += v * v;
  return psi(std::sqrt(r2));
}

}  // namespace cutoff

CMatrix HomogeneousComponent::value(std::span<const double> x, std::span<const double> xi) const {
  if (eval) return eval(x, xi);
  return jet_fn(x, xi, 0).value();
}

Jet HomogeneousComponent::jet(std::span<const double> x, std::span<const double> xi, int order) const {
  if (order > jet_order) {
    throw JetOrderError("component supports jets up to order " + std::to_string(jet_order) +
                        ", order " + std::to_string(order) + " requested");
  }
  return jet_fn(x, xi, order);
}

CMatrix HomogeneousComponent::partial(std::span<const double> x, std::span<const double> xi,
                                      std::span<const int> alpha, std::span<const int> beta) const {
  int total = 0;
  for (int a : alpha) total += a;
  for (int b : beta) total += b;
  return jet(x, xi, total).partial(phase_index(alpha, beta));
}

HomogeneousComponent finite_difference_component(cplx degree, int d, int n,
                                                 HomogeneousComponent::EvalFn f, int max_order) {
  HomogeneousComponent c;
  c.degree = degree;
  c.eval = f;
  c.jet_order = max_order;
  c.jet_fn = [f, d, n](std::span<const double> x, std::span<const double> xi, int order) {
    const int nv = 2 * d;
    std::vector<double> y(nv), h(nv);
    for (int i = 0; i < d; ++i) {
      y[i] = x[i];
      y[d + i] = xi[i];
    }
    const double eps3 = std::cbrt(std::numeric_limits<double>::epsilon());
    for (int v = 0; v < nv; ++v) h[v] = eps3 * (1.0 + std::abs(y[v]));
    Jet out(nv, order, n);
    const JetLayout& lay = JetLayout::get(nv, order);
    std::vector<double> z(nv);
    for (std::size_t t = 0; t < lay.size(); ++t) {
      const MultiIndex& g = lay.term(t);
      // tensor product of central stencils (k/2 − l) h, weights (−1)^l C(k, l)
      std::vector<int> counter(nv, 0);
      CMatrix acc = CMatrix::Zero(n, n);
      while (true) {
        double w = 1.0;
        for (int v = 0; v < nv; ++v) {
          const int k = g[v], l = counter[v];
          double binom = 1.0;
          for (int i = 1; i <= l; ++i) binom *= static_cast<double>(k - l + i) / i;
          w *= ((l % 2) ? -1.0 : 1.0) * binom / std::pow(h[v], k);
          z[v] = y[v] + (0.5 * k - l) * h[v];
        }
        acc += w * f(std::span<const double>(z.data(), d), std::span<const double>(z.data() + d, d));
        int v = 0;
        while (v < nv) {
          if (++counter[v] <= g[v]) break;
          counter[v] = 0;
          ++v;
        }
        if (v == nv) break;
      }
      acc /= factorial(g);
      std::copy(acc.data(), acc.data() + n * n, out.block(t));
    }
    return out;
  };
  return c;
}

ClassicalSymbol::ClassicalSymbol(int d, MatrixAlgebraSpec algebra, cplx order,
                                 std::vector<HomogeneousComponent> components,
                                 std::optional<Box> spatial_support)
    : d_(d),
      algebra_(algebra),
      order_(order),
      components_(std::move(components)),
      spatial_support_(std::move(spatial_support)) {
  if (d_ < 1) throw ConfigurationError("ClassicalSymbol: d must be positive");
  if (components_.empty()) throw ConfigurationError("ClassicalSymbol: no components");
  for (std::size_t j = 0; j < components_.size(); ++j) {
    const cplx expect = order_ - static_cast<double>(j);
    if (std::abs(components_[j].degree - expect) > 1e-12 * (1.0 + std::abs(expect)))
      throw ConfigurationError("ClassicalSymbol: component " + std::to_string(j) +
                               " has degree inconsistent with order − j");
    components_[j].degree = expect;
  }
  if (spatial_support_ && spatial_support_->d() != d_)
    throw ConfigurationError("ClassicalSymbol: support dimension mismatch");
}

double ClassicalSymbol::real_order() const {
  if (std::abs(order_.imag()) > 1e-14) throw DomainError("symbol order is not real");
  return order_.real();
}

int ClassicalSymbol::min_jet_order() const {
  int o = std::numeric_limits<int>::max();
  for (const auto& c : components_) o = std::min(o, c.jet_order);
  return o;
}

ClassicalSymbol ClassicalSymbol::truncated(int N) const {
  if (N < 1) throw ConfigurationError("truncation must be at least 1");
  auto comps = components_;
  if (static_cast<int>(comps.size()) > N) comps.resize(N);
  return ClassicalSymbol(d_, algebra_, order_, std::move(comps), spatial_support_);
}

ClassicalSymbol ClassicalSymbol::with_support(std::optional<Box> support) const {
  return ClassicalSymbol(d_, algebra_, order_, components_, std::move(support));
}

CMatrix evaluate_symbol(const ClassicalSymbol& sigma, std::span<const double> x,
                        std::span<const double> xi) {
  const int n = sigma.n();
  const double phi = cutoff::phi(xi);
  if (phi == 0.0) return CMatrix::Zero(n, n);
  CMatrix out = CMatrix::Zero(n, n);
  for (const auto& c : sigma.components()) {
    const CMatrix v = c.value(x, xi);
    if (v.rows() == 1 && v.cols() == 1 && n > 1) {
      out.diagonal().array() += v(0, 0);
      continue;
    }
    if (v.rows() != n || v.cols() != n) {
      throw ConfigurationError("evaluate_symbol: component returned " + std::to_string(v.rows()) +
                               "x" + std::to_string(v.cols()) + ", algebra has n = " +
                               std::to_string(n));
    }
    out += v;
  }
  return phi * out;
}

Jet xi_derivative(const Jet& j, int d, const MultiIndex& alpha) {
  Jet out = j;
  for (int v = 0; v < d; ++v)
    for (int k = 0; k < alpha[v]; ++k) out = out.derivative(d + v);
  return out;
}

Jet x_dderivative(const Jet& j, int d, const MultiIndex& alpha) {
  Jet out = j;
  int total = 0;
  for (int v = 0; v < d; ++v)
    for (int k = 0; k < alpha[v]; ++k) {
      out = out.derivative(v);
      ++total;
    }
  static const cplx minus_i_pow[4] = {1.0, cplx(0, -1), -1.0, cplx(0, 1)};
  return out * minus_i_pow[total % 4];
}

ClassicalSymbol compose_symbols(const ClassicalSymbol& b, const ClassicalSymbol& a, int N) {
  if (a.d() != b.d()) throw ConfigurationError("compose_symbols: dimension mismatch");
  if (!(a.algebra() == b.algebra())) throw ConfigurationError("compose_symbols: algebra mismatch");
  if (N < 1) throw ConfigurationError("compose_symbols: N must be at least 1");
  const int need = N - 1;
  if (a.min_jet_order() < need || b.min_jet_order() < need) {
    throw JetOrderError("compose_symbols: truncation N = " + std::to_string(N) +
                        " requires jets of order " + std::to_string(need) +
                        ", operands provide " +
                        std::to_string(std::min(a.min_jet_order(), b.min_jet_order())));
  }
  const int d = a.d();
  auto bs = std::make_shared<ClassicalSymbol>(b);
  auto as = std::make_shared<ClassicalSymbol>(a);
  const int base_jet = std::min(a.min_jet_order(), b.min_jet_order());
  std::vector<HomogeneousComponent> comps;
  for (int j = 0; j < N; ++j) {
    HomogeneousComponent c;
    c.degree = a.order() + b.order() - static_cast<double>(j);
    c.jet_order = base_jet - j;
    c.jet_fn = [bs, as, j, d](std::span<const double> x, std::span<const double> xi, int order) {
      Jet sum;
      for (int k = 0; k <= j && k < bs->truncation(); ++k) {
        const Jet jb = bs->component(k).jet(x, xi, order + j - k);
        for (int l = 0; k + l <= j && l < as->truncation(); ++l) {
          const Jet ja = as->component(l).jet(x, xi, order + j - l);
          for (const MultiIndex& alpha : indices_of_degree(d, j - k - l)) {
            const Jet lhs = xi_derivative(jb, d, alpha).truncated(order);
            const Jet rhs = x_dderivative(ja, d, alpha).truncated(order);
            sum += (1.0 / factorial(alpha)) * (lhs * rhs);
          }
        }
      }
      if (sum.empty()) sum = Jet(2 * d, order, 1);
      return sum;
    };
    comps.push_back(std::move(c));
  }
  return ClassicalSymbol(d, a.algebra(), a.order() + b.order(), std::move(comps),
                         a.spatial_support() ? a.spatial_support() : b.spatial_support());
}

ClassicalSymbol adjoint_symbol(const ClassicalSymbol& a, int N) {
  if (N < 1) throw ConfigurationError("adjoint_symbol: N must be at least 1");
  const int need = 2 * (N - 1);
  if (a.min_jet_order() < need) {
    throw JetOrderError("adjoint_symbol: truncation N = " + std::to_string(N) +
                        " requires jets of order " + std::to_string(need));
  }
  const int d = a.d();
  auto as = std::make_shared<ClassicalSymbol>(a);
  std::vector<HomogeneousComponent> comps;
  for (int j = 0; j < N; ++j) {
    HomogeneousComponent c;
    c.degree = std::conj(a.order()) - static_cast<double>(j);
    c.jet_order = a.min_jet_order() - 2 * j;
    c.jet_fn = [as, j, d](std::span<const double> x, std::span<const double> xi, int order) {
      Jet sum;
      for (int k = 0; k <= j && k < as->truncation(); ++k) {
        const int deg = j - k;
        const Jet ja = as->component(k).jet(x, xi, order + 2 * deg).adjoint();
        for (const MultiIndex& alpha : indices_of_degree(d, deg)) {
          const Jet t = xi_derivative(x_dderivative(ja, d, alpha), d, alpha).truncated(order);
          sum += (1.0 / factorial(alpha)) * t;
        }
      }
      if (sum.empty()) sum = Jet(2 * d, order, 1);
      return sum;
    };
    comps.push_back(std::move(c));
  }
  return ClassicalSymbol(d, a.algebra(), std::conj(a.order()), std::move(comps), a.spatial_support());
}

ClassicalSymbol add_symbols(const ClassicalSymbol& a, const ClassicalSymbol& b) {
  if (a.d() != b.d() || !(a.algebra() == b.algebra()))
    throw ConfigurationError("add_symbols: shape mismatch");
  const cplx shift = a.order() - b.order();
  if (std::abs(shift.imag()) > 1e-14 || std::abs(shift.real() - std::round(shift.real())) > 1e-12)
    throw ConfigurationError("add_symbols: orders must differ by an integer");
  const ClassicalSymbol& hi = shift.real() >= 0 ? a : b;
  const ClassicalSymbol& lo = shift.real() >= 0 ? b : a;
  const int offset = static_cast<int>(std::lround(std::abs(shift.real())));
  std::vector<HomogeneousComponent> comps = hi.components();
  const int total = std::max(hi.truncation(), offset + lo.truncation());
  while (static_cast<int>(comps.size()) < total) {
    HomogeneousComponent z;
    z.degree = hi.order() - static_cast<double>(comps.size());
    const int d = a.d();
    z.jet_fn = [d](std::span<const double>, std::span<const double>, int order) {
      return Jet(2 * d, order, 1);
    };
    comps.push_back(z);
  }
  for (int l = 0; l < lo.truncation(); ++l) {
    HomogeneousComponent& target = comps[offset + l];
    const HomogeneousComponent first = target, second = lo.component(l);
    target.jet_order = std::min(first.jet_order, second.jet_order);
    target.eval = nullptr;
    target.jet_fn = [first, second](std::span<const double> x, std::span<const double> xi, int order) {
      return first.jet(x, xi, order) + second.jet(x, xi, order);
    };
  }
  std::optional<Box> supp;
  if (a.spatial_support() && b.spatial_support())
    supp = Box::hull(*a.spatial_support(), *b.spatial_support());
  return ClassicalSymbol(a.d(), a.algebra(), hi.order(), std::move(comps), supp);
}

ClassicalSymbol scale_symbol(const ClassicalSymbol& a, cplx s) {
  std::vector<HomogeneousComponent> comps = a.components();
  for (auto& c : comps) {
    const HomogeneousComponent orig = c;
    c.jet_fn = [orig, s](std::span<const double> x, std::span<const double> xi, int order) {
      return orig.jet(x, xi, order) * s;
    };
    if (orig.eval) {
      c.eval = [orig, s](std::span<const double> x, std::span<const double> xi) {
        return CMatrix(orig.eval(x, xi) * s);
      };
    }
  }
  return ClassicalSymbol(a.d(), a.algebra(), a.order(), std::move(comps), a.spatial_support());
}

double component_distance(const ClassicalSymbol& a, const ClassicalSymbol& b, int N,
                          std::span<const std::vector<double>> xs,
                          std::span<const std::vector<double>> us) {
  if (std::abs(a.order() - b.order()) > 1e-12)
    throw ConfigurationError("component_distance: orders differ");
  double worst = 0.0;
  const int count = std::min({N, a.truncation(), b.truncation()});
  for (int j = 0; j < count; ++j)
    for (const auto& x : xs)
      for (const auto& u : us) {
        CMatrix va = a.component(j).value(x, u);
        CMatrix vb = b.component(j).value(x, u);
        if (va.size() == 1 && vb.size() > 1) va = va(0, 0) * CMatrix::Identity(vb.rows(), vb.cols());
        if (vb.size() == 1 && va.size() > 1) vb = vb(0, 0) * CMatrix::Identity(va.rows(), va.cols());
        worst = std::max(worst, (va - vb).cwiseAbs().maxCoeff());
      }
  return worst;
}

double euler_defect(const HomogeneousComponent& c, std::span<const double> x,
                    std::span<const double> xi) {
  const int d = static_cast<int>(xi.size());
  const Jet j = c.jet(x, xi, 1);
  const CMatrix v = j.value();
  CMatrix radial = CMatrix::Zero(v.rows(), v.cols());
  for (int i = 0; i < d; ++i) {
    MultiIndex g(2 * d, 0);
    g[d + i] = 1;
    radial += xi[i] * j.partial(g);
  }
  const double num = (radial - c.degree * v).cwiseAbs().maxCoeff();
  const double scale = std::max({v.cwiseAbs().maxCoeff(), radial.cwiseAbs().maxCoeff(), 1e-300});
  return num / scale;
}

}  // namespace psilab

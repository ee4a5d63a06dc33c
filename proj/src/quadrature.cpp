#include "psilab/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

#include <Eigen/Eigenvalues>

#include "psilab/errors.hpp"

namespace psilab {

Rule1D gauss_legendre(int n, double a, double b) {
  if (n < 1) throw ConfigurationError("gauss_legendre: n must be positive");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double beta = k / std::sqrt(4.0 * k * k - 1.0);
    J(k, k - 1) = J(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Rule1D r;
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  for (int k = 0; k < n; ++k) {
    r.x.push_back(mid + half * es.eigenvalues()(k));
    const double v = es.eigenvectors()(0, k);
    r.w.push_back(2.0 * v * v * half);
  }
  return r;
}

Rule1D composite_gauss_legendre(int panels, int per_panel, double a, double b) {
  if (panels < 1) throw ConfigurationError("composite_gauss_legendre: panels must be positive");
  Rule1D out;
  const double width = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const Rule1D g = gauss_legendre(per_panel, a + p * width, a + (p + 1) * width);
    out.x.insert(out.x.end(), g.x.begin(), g.x.end());
    out.w.insert(out.w.end(), g.w.begin(), g.w.end());
  }
  return out;
}

double sphere_measure(int d) {
  if (d < 1) throw ConfigurationError("sphere_measure: d must be positive");
  return 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d);
}

namespace {

// All signed permutations of a generator, deduplicated.
void add_orbit(Rule& r, std::array<double, 3> g, double w) {
  std::set<std::array<long long, 3>> seen;
  std::array<int, 3> perm = {0, 1, 2};
  do {
    for (int s = 0; s < 8; ++s) {
      std::array<double, 3> v;
      for (int i = 0; i < 3; ++i) v[i] = g[perm[i]] * ((s >> i) & 1 ? -1.0 : 1.0);
      std::array<long long, 3> key;
      for (int i = 0; i < 3; ++i) key[i] = std::llround(v[i] * 1e12);
      if (seen.insert(key).second) {
        r.nodes.push_back({v[0], v[1], v[2]});
        r.weights.push_back(w);
      }
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
}

Rule lebedev(int points) {
  Rule r;
  const double s2 = 1.0 / std::sqrt(2.0), s3 = 1.0 / std::sqrt(3.0);
  auto bk = [&](double l, double w) { add_orbit(r, {l, l, std::sqrt(1.0 - 2.0 * l * l)}, w); };
  switch (points) {
    case 26:
      add_orbit(r, {1, 0, 0}, 1.0 / 21.0);
      add_orbit(r, {0, s2, s2}, 4.0 / 105.0);
      add_orbit(r, {s3, s3, s3}, 9.0 / 280.0);
      break;
    case 50:
      add_orbit(r, {1, 0, 0}, 4.0 / 315.0);
      add_orbit(r, {0, s2, s2}, 64.0 / 2835.0);
      add_orbit(r, {s3, s3, s3}, 27.0 / 1280.0);
      bk(1.0 / std::sqrt(11.0), 14641.0 / 725760.0);
      break;
    case 86: {
      add_orbit(r, {1, 0, 0}, 0.01154401154401154);
      add_orbit(r, {s3, s3, s3}, 0.01194390908585628);
      bk(0.3696028464541502, 0.01111055571060340);
      bk(0.6943540066026664, 0.01187650129453714);
      const double p = 0.3742430390903412;
      add_orbit(r, {p, std::sqrt(1.0 - p * p), 0.0}, 0.01181230374690448);
      break;
    }
    default:
      throw ConfigurationError("sphere_rule: d = 3 supports 26, 50 or 86 points");
  }
  for (double& w : r.weights) w *= 4.0 * kPi;
  return r;
}

}  // namespace

Rule sphere_rule(int d, int points) {
  Rule r;
  if (d == 1) {
    r.nodes = {{1.0}, {-1.0}};
    r.weights = {1.0, 1.0};
    return r;
  }
  if (d == 2) {
    if (points < 3) throw ConfigurationError("sphere_rule: need at least 3 angles");
    for (int k = 0; k < points; ++k) {
      const double t = 2.0 * kPi * (k + 0.5) / points;
      r.nodes.push_back({std::cos(t), std::sin(t)});
      r.weights.push_back(2.0 * kPi / points);
    }
    return r;
  }
  if (d == 3) return lebedev(points);
  throw ConfigurationError("sphere_rule: only d ≤ 3 is supported");
}

Rule box_rule(const Box& box, int per_axis) {
  if (per_axis < 2) throw ConfigurationError("box_rule: need at least 2 nodes per axis");
  const int d = box.d();
  std::vector<std::vector<double>> xs(d), ws(d);
  for (int a = 0; a < d; ++a) {
    const double h = (box.hi[a] - box.lo[a]) / (per_axis - 1);
    for (int k = 0; k < per_axis; ++k) {
      xs[a].push_back(box.lo[a] + k * h);
      ws[a].push_back((k == 0 || k == per_axis - 1) ? 0.5 * h : h);
    }
  }
  Rule r;
  std::vector<int> idx(d, 0);
  while (true) {
    std::vector<double> x(d);
    double w = 1.0;
    for (int a = 0; a < d; ++a) {
      x[a] = xs[a][idx[a]];
      w *= ws[a][idx[a]];
    }
    r.nodes.push_back(std::move(x));
    r.weights.push_back(w);
    int a = d - 1;
    while (a >= 0 && ++idx[a] == per_axis) idx[a--] = 0;
    if (a < 0) break;
  }
  return r;
}

}  // namespace psilab

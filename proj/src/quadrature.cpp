#include "mtf/quadrature.hpp"

#include <cstdlib>
#include <string>

#include <Eigen/Eigenvalues>

namespace mtf::quadrature {

QuadRule gauss_legendre(int order) {
  if (order < 1 || order > 64) {
    throw std::invalid_argument("gauss_legendre: order must lie in [1, 64], got " + std::to_string(order));
  }
  const int n = order;
  QuadRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    long double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    long double dp = 0.0L;
    for (int it = 0; it < 100; ++it) {
      long double p0 = 1.0L;
      long double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const long double p2 = ((2.0L * k - 1.0L) * x * p1 - (k - 1.0L) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p0 = 1.0L;
      }
      // p1 = P_n(x), p0 = P_{n-1}(x)
      dp = n * (x * p1 - p0) / (x * x - 1.0L);
      const long double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-19L) {
        break;
      }
    }
    const long double w = 2.0L / ((1.0L - x * x) * dp * dp);
    // x is the i-th largest root; map [-1, 1] onto [0, 1] in ascending order
    rule.nodes[n - 1 - i] = static_cast<double>(0.5L * (1.0L + x));
    rule.nodes[i] = static_cast<double>(0.5L * (1.0L - x));
    rule.weights[n - 1 - i] = static_cast<double>(0.5L * w);
    rule.weights[i] = static_cast<double>(0.5L * w);
  }
  return rule;
}

// Modified Chebyshev algorithm on monic shifted Legendre polynomials, whose
// moments against ln(1/x) are known in closed form; the Jacobi matrix then
// yields nodes and weights (Golub-Welsch).
QuadRule gauss_log(int order) {
  if (order < 1 || order > 32) {
    throw std::invalid_argument("gauss_log: order must lie in [1, 32], got " + std::to_string(order));
  }
  const int n = order;
  const int m = 2 * n;
  std::vector<long double> a(m, 0.5L);
  std::vector<long double> b(m, 0.0L);
  for (int k = 1; k < m; ++k) {
    const long double kk = static_cast<long double>(k) * k;
    b[k] = kk / (4.0L * (4.0L * kk - 1.0L));
  }
  // moments of the standard shifted Legendre P*_k, rescaled to monic form
  std::vector<long double> nu(m);
  long double lead = 1.0L;  // (k!)^2 / (2k)!
  for (int k = 0; k < m; ++k) {
    if (k > 0) {
      lead *= static_cast<long double>(k) * k / ((2.0L * k - 1.0L) * (2.0L * k));
    }
    const long double raw = (k == 0) ? 1.0L : ((k % 2 == 0) ? 1.0L : -1.0L) / (static_cast<long double>(k) * (k + 1));
    nu[k] = raw * lead;
  }

  std::vector<long double> alpha(n), beta(n);
  std::vector<long double> sig_prev(m + 1, 0.0L);  // sigma_{k-2}
  std::vector<long double> sig(m + 1, 0.0L);       // sigma_{k-1}
  for (int l = 0; l < m; ++l) {
    sig[l] = nu[l];
  }
  alpha[0] = a[0] + nu[1] / nu[0];
  beta[0] = nu[0];
  for (int k = 1; k < n; ++k) {
    std::vector<long double> next(m + 1, 0.0L);
    for (int l = k; l < m - k; ++l) {
      next[l] = sig[l + 1] - (alpha[k - 1] - a[l]) * sig[l] - beta[k - 1] * sig_prev[l] + b[l] * sig[l - 1];
    }
    alpha[k] = a[k] + next[k + 1] / next[k] - sig[k] / sig[k - 1];
    beta[k] = next[k] / sig[k - 1];
    sig_prev = sig;
    sig = next;
  }

  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    jacobi(k, k) = static_cast<double>(alpha[k]);
    if (k + 1 < n) {
      const double off = static_cast<double>(std::sqrt(beta[k + 1]));
      jacobi(k, k + 1) = off;
      jacobi(k + 1, k) = off;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  QuadRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int k = 0; k < n; ++k) {
    rule.nodes[k] = es.eigenvalues()(k);
    const double v0 = es.eigenvectors()(0, k);
    rule.weights[k] = static_cast<double>(beta[0]) * v0 * v0;
  }
  return rule;
}

const char* to_string(PanelPairClass c) {
  switch (c) {
    case PanelPairClass::coincident:
      return "coincident";
    case PanelPairClass::adjacent:
      return "adjacent";
    case PanelPairClass::near:
      return "near";
    case PanelPairClass::far:
      return "far";
  }
  return "?";
}

namespace {

double point_segment_distance(const Vec2& p, const Panel& seg) {
  const Vec2 d = seg.b - seg.a;
  const double len2 = d.squaredNorm();
  double t = len2 > 0.0 ? (p - seg.a).dot(d) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - seg.point(t)).norm();
}

double cross(const Vec2& u, const Vec2& v) { return u.x() * v.y() - u.y() * v.x(); }

bool segments_cross(const Panel& p, const Panel& q) {
  const double d1 = cross(p.b - p.a, q.a - p.a);
  const double d2 = cross(p.b - p.a, q.b - p.a);
  const double d3 = cross(q.b - q.a, p.a - q.a);
  const double d4 = cross(q.b - q.a, p.b - q.a);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

}  // namespace

double segment_distance(const Panel& p, const Panel& q) {
  if (segments_cross(p, q)) {
    return 0.0;
  }
  return std::min({point_segment_distance(p.a, q), point_segment_distance(p.b, q), point_segment_distance(q.a, p),
                   point_segment_distance(q.b, p)});
}

PanelPairClass classify(const Panel& x, const Panel& y, double near_factor) {
  const bool aa = x.a == y.a;
  const bool bb = x.b == y.b;
  const bool ab = x.a == y.b;
  const bool ba = x.b == y.a;
  if ((aa && bb) || (ab && ba)) {
    return PanelPairClass::coincident;
  }
  if (aa || bb || ab || ba) {
    return PanelPairClass::adjacent;
  }
  const double size = std::max(x.length(), y.length());
  return segment_distance(x, y) < near_factor * size ? PanelPairClass::near : PanelPairClass::far;
}

PairRules rules_with_order(int far_order) {
  if (far_order < 1 || far_order > 28) {
    throw std::invalid_argument("quadrature order must lie in [1, 28]");
  }
  PairRules r;
  r.far = gauss_legendre(far_order);
  r.near = gauss_legendre(2 * far_order);
  r.smooth = gauss_legendre(far_order + 4);
  r.log = gauss_log(far_order + 4);
  return r;
}

PairRules default_rules() {
  int order = 6;
  if (const char* env = std::getenv("MTF_QUAD_ORDER")) {
    order = std::atoi(env);
  }
  return rules_with_order(order);
}

}  // namespace mtf::quadrature

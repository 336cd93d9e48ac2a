#include <cmath>
#include <cstdlib>

#include <doctest.h>

#include "mtf/quadrature.hpp"

using namespace mtf;
using namespace mtf::quadrature;

namespace {

double integrate(const QuadRule& q, int power) {
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    s += q.weights[i] * std::pow(q.nodes[i], power);
  }
  return s;
}

struct ScalarIntegrand {
  using Value = double;
  double (*full_fn)(double r, double s, double t);
  double log_coeff;
  double (*smooth_fn)(double r, double s, double t);

  double full(const PairPoint& p) const { return full_fn(p.r, p.s, p.t); }
  SplitValue<double> split(const PairPoint& p) const { return {log_coeff, smooth_fn(p.r, p.s, p.t)}; }
};

double one(double, double, double) { return 1.0; }
double zero(double, double, double) { return 0.0; }
double logr(double r, double, double) { return std::log(r); }

}  // namespace

TEST_CASE("Gauss-Legendre closed forms") {
  const auto g1 = gauss_legendre(1);
  CHECK(g1.nodes[0] == doctest::Approx(0.5));
  CHECK(g1.weights[0] == doctest::Approx(1.0));
  const auto g2 = gauss_legendre(2);
  CHECK(g2.nodes[0] == doctest::Approx(0.5 - 0.5 / std::sqrt(3.0)));
  CHECK(g2.nodes[1] == doctest::Approx(0.5 + 0.5 / std::sqrt(3.0)));
  CHECK(g2.weights[0] == doctest::Approx(0.5));
  CHECK(std::fabs(integrate(gauss_legendre(3), 5) - 1.0 / 6.0) < 1e-15);
}

TEST_CASE("Gauss-Legendre exactness degree 2n-1") {
  for (int n : {1, 2, 5, 10, 16, 24, 32, 48, 64}) {
    const auto q = gauss_legendre(n);
    for (int k = 0; k <= 2 * n - 1; k += std::max(1, (2 * n - 1) / 8)) {
      INFO("order " << n << ", degree " << k);
      CHECK(std::fabs(integrate(q, k) - 1.0 / (k + 1)) < 1e-14);
    }
  }
  CHECK_THROWS(gauss_legendre(0));
  CHECK_THROWS(gauss_legendre(65));
}

TEST_CASE("log-weighted Gauss rule moments") {
  CHECK(std::fabs(integrate(gauss_log(1), 0) - 1.0) < 1e-15);
  CHECK(std::fabs(integrate(gauss_log(1), 1) - 0.25) < 1e-15);
  CHECK(std::fabs(integrate(gauss_log(2), 3) - 1.0 / 16.0) < 1e-14);
  for (int n : {1, 3, 8, 12, 20, 32}) {
    const auto q = gauss_log(n);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      INFO("order " << n << ", degree " << k);
      // int_0^1 x^k ln(1/x) dx = 1/(k+1)^2
      CHECK(std::fabs(integrate(q, k) - 1.0 / ((k + 1.0) * (k + 1.0))) < 1e-13);
    }
  }
  CHECK_THROWS(gauss_log(0));
  CHECK_THROWS(gauss_log(33));
}

TEST_CASE("panel pair classification") {
  const Panel a{Vec2(0, 0), Vec2(1, 0)};
  const Panel b{Vec2(1, 0), Vec2(2, 0.5)};
  const Panel c{Vec2(0, 1.5), Vec2(1, 1.5)};
  const Panel d{Vec2(0, 10), Vec2(1, 10)};
  CHECK(classify(a, a) == PanelPairClass::coincident);
  CHECK(classify(a, Panel{a.b, a.a}) == PanelPairClass::coincident);
  CHECK(classify(a, b) == PanelPairClass::adjacent);
  CHECK(classify(a, c) == PanelPairClass::near);
  CHECK(classify(a, d) == PanelPairClass::far);
  CHECK(segment_distance(a, c) == doctest::Approx(1.5));
}

TEST_CASE("constant kernel integrates to one on unit panels") {
  const Panel a{Vec2(0, 0), Vec2(1, 0)};
  const Panel b{Vec2(1, 0), Vec2(1, 1)};
  const Panel far{Vec2(5, 5), Vec2(6, 5)};
  const ScalarIntegrand f{one, 0.0, one};
  const auto rules = default_rules();
  for (auto [p, q] : {std::pair{a, a}, std::pair{a, b}, std::pair{a, far}}) {
    CHECK(integrate_panel_pair(f, p, q, classify(p, q), rules) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("coincident log integral equals -3/2") {
  const Panel a{Vec2(0, 0), Vec2(1, 0)};
  const ScalarIntegrand f{logr, 1.0, zero};
  const double v = integrate_panel_pair(f, a, a, PanelPairClass::coincident, default_rules());
  CHECK(std::fabs(v + 1.5) < 1e-13);
  // length 2: ln|2(s-t)| = ln 2 + ln|s-t|
  const Panel b{Vec2(0, 0), Vec2(0, 2)};
  const double w = integrate_panel_pair(f, b, b, PanelPairClass::coincident, default_rules());
  CHECK(std::fabs(w - (std::log(2.0) - 1.5)) < 1e-13);
}

TEST_CASE("adjacent log integral matches a fine composite rule") {
  // two perpendicular unit panels sharing the origin
  const Panel a{Vec2(1, 0), Vec2(0, 0)};
  const Panel b{Vec2(0, 0), Vec2(0, 1)};
  const ScalarIntegrand f{logr, 1.0, zero};
  const double v = integrate_panel_pair(f, a, b, PanelPairClass::adjacent, default_rules());
  // closed form of int_0^1 int_0^1 ln sqrt(s^2 + t^2) ds dt
  const double exact = (std::log(2.0) - 3.0) / 2.0 + kPi / 4.0;
  CHECK(std::fabs(v - exact) < 1e-12);
}

TEST_CASE("near pair refinement agrees with a high-order tensor rule") {
  const Panel a{Vec2(0, 0), Vec2(1, 0)};
  const Panel b{Vec2(0.2, 0.05), Vec2(0.9, 0.08)};
  const ScalarIntegrand f{logr, 1.0, zero};
  const double v = integrate_panel_pair(f, a, b, PanelPairClass::near, default_rules());
  PairRules fine = rules_with_order(28);
  fine.max_depth = 30;
  const double w = integrate_panel_pair(f, a, b, PanelPairClass::near, fine);
  CHECK(std::fabs(v - w) < 1e-11);
}

TEST_CASE("MTF_QUAD_ORDER rescales the default rules") {
  setenv("MTF_QUAD_ORDER", "8", 1);
  const auto r = default_rules();
  unsetenv("MTF_QUAD_ORDER");
  CHECK(r.far.size() == 8);
  CHECK(r.near.size() == 16);
  CHECK(r.log.size() == 12);
  CHECK(default_rules().far.size() == 6);
}

#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <vector>

#include "mtf/types.hpp"

namespace mtf::quadrature {

/// Quadrature rule on the reference interval [0, 1].
struct QuadRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// Gauss-Legendre rule, exact for polynomials of degree 2*order-1. 1 <= order <= 64.
QuadRule gauss_legendre(int order);

/// Gauss rule for the weight ln(1/x) on [0, 1]. 1 <= order <= 32.
QuadRule gauss_log(int order);

enum class PanelPairClass { coincident, adjacent, near, far };

const char* to_string(PanelPairClass c);

/// Straight panel x(s) = a + s (b - a), s in [0, 1].
struct Panel {
  Vec2 a;
  Vec2 b;

  double length() const { return (b - a).norm(); }
  Vec2 point(double s) const { return a + s * (b - a); }
};

double segment_distance(const Panel& p, const Panel& q);

/// Shared endpoints are detected by exact equality; mesh nodes are shared
/// objects so touching panels carry bitwise identical coordinates.
PanelPairClass classify(const Panel& x, const Panel& y, double near_factor = 2.0);

struct PairRules {
  QuadRule far;     // tensor rule for well separated pairs
  QuadRule near;    // tensor rule on each admissible sub-pair of a near pair
  QuadRule smooth;  // regular directions of the singular rules
  QuadRule log;     // ln(1/u) weighted rule for singular directions
  double near_factor = 2.0;
  int max_depth = 24;
};

/// Far order 6, near order 12, coincident/adjacent 10-point log + 10-point
/// Gauss. MTF_QUAD_ORDER=N in the environment rescales these to N, 2N, N+4.
PairRules default_rules();
PairRules rules_with_order(int far_order);

struct PairPoint {
  double s;  // parameter on the x panel
  double t;  // parameter on the y panel
  Vec2 x;
  Vec2 y;
  double r;
};

/// full = log_coeff * ln(r) + smooth, with log_coeff and smooth regular.
template <class V>
struct SplitValue {
  V log_coeff;
  V smooth;
};

template <class F>
concept PanelIntegrand = requires(const F& f, const PairPoint& p) {
  typename F::Value;
  { f.full(p) } -> std::convertible_to<typename F::Value>;
  { f.split(p) } -> std::convertible_to<SplitValue<typename F::Value>>;
};

namespace detail {

inline PairPoint make_point(const Panel& px, const Panel& py, double s, double t) {
  PairPoint p{s, t, px.point(s), py.point(t), 0.0};
  p.r = (p.x - p.y).norm();
  return p;
}

template <PanelIntegrand F>
typename F::Value tensor(const F& f, const Panel& px, const Panel& py, const QuadRule& rule,
                         double s0, double s1, double t0, double t1) {
  using V = typename F::Value;
  V acc{};
  const double ls = s1 - s0;
  const double lt = t1 - t0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double s = s0 + ls * rule.nodes[i];
    for (std::size_t j = 0; j < rule.size(); ++j) {
      const double t = t0 + lt * rule.nodes[j];
      acc += f.full(make_point(px, py, s, t)) * (rule.weights[i] * rule.weights[j]);
    }
  }
  return acc * (ls * lt);
}

template <PanelIntegrand F>
typename F::Value near_recursive(const F& f, const Panel& px, const Panel& py, const PairRules& rules,
                                 double s0, double s1, double t0, double t1, int depth) {
  const Panel sx{px.point(s0), px.point(s1)};
  const Panel sy{py.point(t0), py.point(t1)};
  const double size = std::max(sx.length(), sy.length());
  if (segment_distance(sx, sy) >= size || depth >= rules.max_depth) {
    return tensor(f, px, py, rules.near, s0, s1, t0, t1);
  }
  const double sm = 0.5 * (s0 + s1);
  const double tm = 0.5 * (t0 + t1);
  auto acc = near_recursive(f, px, py, rules, s0, sm, t0, tm, depth + 1);
  acc += near_recursive(f, px, py, rules, s0, sm, tm, t1, depth + 1);
  acc += near_recursive(f, px, py, rules, sm, s1, t0, tm, depth + 1);
  acc += near_recursive(f, px, py, rules, sm, s1, tm, t1, depth + 1);
  return acc;
}

// Both panels share one endpoint v. Local parameters s', t' run from v, and
// each triangle of the unit square is collapsed onto v (Duffy), so that
// r = u rho(w) and ln r = ln u + ln rho(w).
template <PanelIntegrand F>
typename F::Value adjacent(const F& f, const Panel& px, const Panel& py, const PairRules& rules) {
  using V = typename F::Value;
  const bool x_from_a = (px.a == py.a) || (px.a == py.b);
  const Vec2 v = x_from_a ? px.a : px.b;
  const bool y_from_a = (py.a == v);
  auto s_of = [&](double sl) { return x_from_a ? sl : 1.0 - sl; };
  auto t_of = [&](double tl) { return y_from_a ? tl : 1.0 - tl; };

  V acc{};
  for (int tri = 0; tri < 2; ++tri) {
    // tri 0: t' = u w <= s' = u;  tri 1: s' = u w <= t' = u
    auto local = [&](double u, double w) {
      const double sl = tri == 0 ? u : u * w;
      const double tl = tri == 0 ? u * w : u;
      return detail::make_point(px, py, s_of(sl), t_of(tl));
    };
    // ln(u) part against the log weight
    for (std::size_t i = 0; i < rules.log.size(); ++i) {
      const double u = rules.log.nodes[i];
      V inner{};
      for (std::size_t j = 0; j < rules.smooth.size(); ++j) {
        const auto sv = f.split(local(u, rules.smooth.nodes[j]));
        inner += sv.log_coeff * rules.smooth.weights[j];
      }
      acc += inner * (-rules.log.weights[i] * u);
    }
    // remainder: log_coeff ln(rho) + smooth, regular in (u, w)
    for (std::size_t i = 0; i < rules.smooth.size(); ++i) {
      const double u = rules.smooth.nodes[i];
      for (std::size_t j = 0; j < rules.smooth.size(); ++j) {
        const auto p = local(u, rules.smooth.nodes[j]);
        const auto sv = f.split(p);
        const double rho = p.r / u;
        V val = sv.smooth;
        val += sv.log_coeff * std::log(rho);
        acc += val * (rules.smooth.weights[i] * rules.smooth.weights[j] * u);
      }
    }
  }
  return acc;
}

// Same panel: r = L |s - t|. The ln|s - t| part is integrated in relative
// coordinates u = |s - t| with the log-weighted rule.
template <PanelIntegrand F>
typename F::Value coincident(const F& f, const Panel& px, const Panel& py, const PairRules& rules) {
  using V = typename F::Value;
  const bool reversed = !(px.a == py.a);
  auto t_of = [&](double t) { return reversed ? 1.0 - t : t; };
  const double len = px.length();

  V acc{};
  for (std::size_t i = 0; i < rules.log.size(); ++i) {
    const double u = rules.log.nodes[i];
    const double span = 1.0 - u;
    V inner{};
    for (std::size_t j = 0; j < rules.smooth.size(); ++j) {
      const double hi = u + span * rules.smooth.nodes[j];
      const double lo = hi - u;
      const auto a1 = f.split(detail::make_point(px, py, hi, t_of(lo)));
      const auto a2 = f.split(detail::make_point(px, py, lo, t_of(hi)));
      V both = a1.log_coeff;
      both += a2.log_coeff;
      inner += both * (rules.smooth.weights[j] * span);
    }
    acc += inner * (-rules.log.weights[i]);
  }
  const double log_len = std::log(len);
  for (std::size_t i = 0; i < rules.smooth.size(); ++i) {
    const double s = rules.smooth.nodes[i];
    for (std::size_t j = 0; j < rules.smooth.size(); ++j) {
      const double t = rules.smooth.nodes[j];
      const auto sv = f.split(detail::make_point(px, py, s, t_of(t)));
      V val = sv.smooth;
      val += sv.log_coeff * log_len;
      acc += val * (rules.smooth.weights[i] * rules.smooth.weights[j]);
    }
  }
  return acc;
}

}  // namespace detail

/// Integral over [0,1]^2 of f(s, t); the surface measure is left to f.
template <PanelIntegrand F>
typename F::Value integrate_panel_pair(const F& f, const Panel& px, const Panel& py, PanelPairClass cls,
                                       const PairRules& rules) {
  switch (cls) {
    case PanelPairClass::far:
      return detail::tensor(f, px, py, rules.far, 0.0, 1.0, 0.0, 1.0);
    case PanelPairClass::near:
      return detail::near_recursive(f, px, py, rules, 0.0, 1.0, 0.0, 1.0, 0);
    case PanelPairClass::adjacent:
      return detail::adjacent(f, px, py, rules);
    case PanelPairClass::coincident:
      return detail::coincident(f, px, py, rules);
  }
  return typename F::Value{};
}

}  // namespace mtf::quadrature

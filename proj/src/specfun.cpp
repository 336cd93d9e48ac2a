#include "mtf/specfun.hpp"

#include <cmath>
#include <stdexcept>

namespace mtf::specfun {
namespace {

constexpr long double kPiL = 3.141592653589793238462643383279502884L;
constexpr long double kEulerL = 0.577215664901532860606512090082402431L;

// Below this argument the power series is summed in long double; the
// cancellation factor is at most ~1e2 there.
constexpr double kLongDoubleSeriesMax = 8.0;
// Between the two thresholds the series loses up to ~1e9 to cancellation and
// is summed in binary128. Beyond it the Hankel expansions reach 1e-20.
constexpr double kQuadSeriesMax = 25.0;

template <typename T>
T magnitude(T v) {
  return v < T(0) ? -v : v;
}

template <typename T>
struct SeriesSums {
  T j0;
  T j1;
  T s0;  // sum_{k>=1} (-1)^{k+1} H_k q^k / (k!)^2
  T s1;  // sum_{k>=0} (-q)^k (H_k + H_{k+1}) / (k! (k+1)!)
};

// Ascending series with q = x^2/4. H_k is the k-th harmonic number.
template <typename T>
SeriesSums<T> ascending_series(T x, T tiny) {
  const T q = x * x / T(4);
  T a = T(1);  // (-q)^k / (k!)^2
  T b = T(1);  // (-q)^k / (k! (k+1)!)
  T h = T(0);
  SeriesSums<T> out{T(1), T(1), T(0), T(1)};
  const T peak = x / T(2) + T(2);
  for (int k = 1; k < 400; ++k) {
    const T tk = T(k);
    a *= -q / (tk * tk);
    b *= -q / (tk * (tk + T(1)));
    const T hk = h + T(1) / tk;
    const T hk1 = hk + T(1) / (tk + T(1));
    out.j0 += a;
    out.j1 += b;
    out.s0 -= hk * a;
    out.s1 += (hk + hk1) * b;
    h = hk;
    if (tk > peak && magnitude(a) * (T(1) + hk) + magnitude(b) * (hk + hk1) < tiny) {
      break;
    }
  }
  out.j1 *= x / T(2);
  return out;
}

struct Evaluated {
  long double j0;
  long double j1;
  long double y0;
  long double y1;
  long double y0_regular;
};

Evaluated from_series(long double x, long double j0, long double j1, long double s0,
                      long double s1, bool with_y) {
  Evaluated e{j0, j1, 0.0L, 0.0L, 0.0L};
  if (!with_y) {
    return e;
  }
  const long double two_over_pi = 2.0L / kPiL;
  const long double lg = std::log(x / 2.0L);
  e.y0_regular = two_over_pi * (kEulerL * j0 + s0);
  e.y0 = two_over_pi * lg * j0 + e.y0_regular;
  e.y1 = two_over_pi * (lg + kEulerL) * j1 - two_over_pi / x - x / (2.0L * kPiL) * s1;
  return e;
}

struct AmplitudePhase {
  long double p;
  long double q;
};

// Hankel asymptotic expansion: J = sqrt(2/(pi x)) (P cos chi - Q sin chi).
AmplitudePhase hankel_asymptotic(long double x, int order) {
  const long double mu = 4.0L * order * order;
  long double term = 1.0L;
  long double prev = 1.0L;
  AmplitudePhase ap{1.0L, 0.0L};
  for (int k = 1; k < 80; ++k) {
    const long double odd = 2.0L * k - 1.0L;
    term *= (mu - odd * odd) / (8.0L * k * x);
    const long double mag = std::fabs(term);
    if (mag > prev) {
      break;  // asymptotic series started to diverge
    }
    const int sign = ((k / 2) % 2 == 0) ? 1 : -1;
    if (k % 2 == 0) {
      ap.p += sign * term;
    } else {
      ap.q += sign * term;
    }
    prev = mag;
    if (mag < 1e-22L) {
      break;
    }
  }
  return ap;
}

Evaluated evaluate(double xd, bool with_y) {
  const long double x = xd;
  if (xd <= kLongDoubleSeriesMax) {
    const auto s = ascending_series<long double>(x, 1e-24L);
    return from_series(x, s.j0, s.j1, s.s0, s.s1, with_y);
  }
  if (xd <= kQuadSeriesMax) {
    const auto s = ascending_series<__float128>(static_cast<__float128>(x), __float128(1e-36L));
    return from_series(x, static_cast<long double>(s.j0), static_cast<long double>(s.j1),
                       static_cast<long double>(s.s0), static_cast<long double>(s.s1), with_y);
  }
  const long double c = std::cos(x);
  const long double s = std::sin(x);
  const long double scale = 1.0L / std::sqrt(kPiL * x);
  const auto a0 = hankel_asymptotic(x, 0);
  const auto a1 = hankel_asymptotic(x, 1);
  Evaluated e{};
  e.j0 = scale * ((a0.p + a0.q) * c + (a0.p - a0.q) * s);
  e.y0 = scale * ((a0.q - a0.p) * c + (a0.p + a0.q) * s);
  e.j1 = scale * ((a1.q - a1.p) * c + (a1.p + a1.q) * s);
  e.y1 = scale * (-(a1.p + a1.q) * c + (a1.q - a1.p) * s);
  e.y0_regular = e.y0 - 2.0L / kPiL * std::log(x / 2.0L) * e.j0;
  return e;
}

}  // namespace

BesselJY bessel_j0j1y0y1(double x) {
  if (!(x > 0.0)) {
    throw std::domain_error("bessel_j0j1y0y1: Y0/Y1 require x > 0");
  }
  const auto e = evaluate(x, true);
  return {static_cast<double>(e.j0), static_cast<double>(e.j1), static_cast<double>(e.y0),
          static_cast<double>(e.y1)};
}

double bessel_j0(double x) {
  if (x == 0.0) {
    return 1.0;
  }
  return static_cast<double>(evaluate(std::fabs(x), false).j0);
}

double bessel_j1(double x) {
  if (x == 0.0) {
    return 0.0;
  }
  const double v = static_cast<double>(evaluate(std::fabs(x), false).j1);
  return x < 0.0 ? -v : v;
}

double bessel_y0_regular(double x) {
  if (x == 0.0) {
    return static_cast<double>(2.0L / kPiL * kEulerL);
  }
  return static_cast<double>(evaluate(std::fabs(x), true).y0_regular);
}

KernelValue green_kernel_2d(double kappa, const Vec2& x, const Vec2& y) {
  const Vec2 d = x - y;
  const double r = d.norm();
  if (!(r > 0.0)) {
    throw std::domain_error("green_kernel_2d: coincident points");
  }
  const auto b = bessel_j0j1y0y1(kappa * r);
  KernelValue kv;
  kv.g = Complex(-0.25 * b.y0, 0.25 * b.j0);
  // -(i kappa / 4) H1(kappa r) (x - y) / r
  const Complex radial(0.25 * kappa * b.y1, -0.25 * kappa * b.j1);
  kv.grad = {radial * (d.x() / r), radial * (d.y() / r)};
  return kv;
}

LogSplit log_split(double kappa, double r) {
  const double z = kappa * r;
  const double inv2pi = 1.0 / (2.0 * kPi);
  if (z == 0.0) {
    const double y0reg = bessel_y0_regular(0.0);
    return {Complex(-inv2pi * std::log(kappa / 2.0) - 0.25 * y0reg, 0.25), -inv2pi};
  }
  const auto e = evaluate(z, true);
  const double j0 = static_cast<double>(e.j0);
  const double y0reg = static_cast<double>(e.y0_regular);
  return {Complex(-inv2pi * std::log(kappa / 2.0) * j0 - 0.25 * y0reg, 0.25 * j0), -inv2pi * j0};
}

}  // namespace mtf::specfun

#pragma once

// Reference values computed independently of the library.

#include <cmath>
#include <complex>
#include <vector>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include "mtf/types.hpp"

namespace oracle {

struct Bessel {
  double j0, j1, y0, y1;
};

// Ascending series for J0, J1, Y0, Y1 summed in MPFR. The precision grows
// with x to absorb the cancellation of the alternating terms (~ e^x).
inline Bessel bessel_series(double x) {
  using boost::multiprecision::mpfr_float;
  const unsigned digits = 40 + static_cast<unsigned>(0.45 * x);
  mpfr_float::default_precision(digits);
  const mpfr_float xm(x);
  const mpfr_float half = xm / 2;
  const mpfr_float q = half * half;
  const mpfr_float pi = boost::math::constants::pi<mpfr_float>();
  const mpfr_float gamma = boost::math::constants::euler<mpfr_float>();
  const mpfr_float eps = pow(mpfr_float(10), -static_cast<int>(digits) + 5);

  // term0 = (-q)^k / (k!)^2, term1 = (-1)^k half^(2k+1) / (k! (k+1)!)
  mpfr_float term0 = 1, term1 = half;
  mpfr_float j0 = 0, j1 = 0, s0 = 0, s1 = 0;
  mpfr_float hk = 0;  // H_k
  const int kmin = static_cast<int>(x) + 10;
  for (int k = 0; k < 100000; ++k) {
    const mpfr_float hk1 = hk + mpfr_float(1) / (k + 1);
    j0 += term0;
    j1 += term1;
    s0 += hk * term0;
    s1 += (hk + hk1) * term1;
    const mpfr_float a0 = abs(term0);
    const mpfr_float a1 = abs(term1);
    const mpfr_float tol = eps * (abs(j0) + abs(j1) + 1);
    if (k > kmin && a0 < tol && a1 < tol) {
      break;
    }
    const double d0 = static_cast<double>(k + 1) * (k + 1);
    const double d1 = static_cast<double>(k + 1) * (k + 2);
    term0 = -term0 * q / d0;
    term1 = -term1 * q / d1;
    hk = hk1;
  }
  const mpfr_float lg = log(half);
  const mpfr_float y0 = 2 / pi * (lg + gamma) * j0 - 2 / pi * s0;
  const mpfr_float y1 = 2 / pi * (lg + gamma) * j1 - 2 / (pi * xm) - s1 / pi;
  return {j0.convert_to<double>(), j1.convert_to<double>(), y0.convert_to<double>(), y1.convert_to<double>()};
}

// Plane wave e^{i k0 x} hitting a penetrable disk of radius a (centered at
// the origin), wave number k1 inside. Total field by separation of variables.
class PenetrableDisk {
 public:
  PenetrableDisk(double k0, double k1, double a, int modes = 40) : k0_(k0), k1_(k1), a_(a) {
    using C = std::complex<double>;
    for (int m = 0; m <= modes; ++m) {
      const C im = std::pow(C(0, 1), m);
      const double j0 = jn(m, k0 * a), dj0 = djn(m, k0 * a);
      const double j1 = jn(m, k1 * a), dj1 = djn(m, k1 * a);
      const C h0 = hn(m, k0 * a), dh0 = dhn(m, k0 * a);
      // a_m J_m(k1 a) - b_m H_m(k0 a) = i^m J_m(k0 a)
      // a_m k1 J_m'(k1 a) - b_m k0 H_m'(k0 a) = i^m k0 J_m'(k0 a)
      const C det = -j1 * k0 * dh0 + k1 * dj1 * h0;
      const C r1 = im * j0, r2 = im * k0 * dj0;
      inner_.push_back((-r1 * k0 * dh0 + h0 * r2) / det);
      outer_.push_back((j1 * r2 - k1 * dj1 * r1) / det);
    }
  }

  mtf::Complex field(double x, double y) const {
    const double r = std::hypot(x, y);
    const double t = std::atan2(y, x);
    mtf::Complex sum = 0.0;
    for (int m = 0; m < static_cast<int>(inner_.size()); ++m) {
      const double w = (m == 0 ? 1.0 : 2.0) * std::cos(m * t);
      if (r < a_) {
        sum += w * inner_[m] * jn(m, k1_ * r);
      } else {
        sum += w * (std::pow(mtf::Complex(0, 1), m) * jn(m, k0_ * r) + outer_[m] * hn(m, k0_ * r));
      }
    }
    return sum;
  }

 private:
  static double jn(int m, double x) { return std::cyl_bessel_j(static_cast<double>(m), x); }
  static double yn(int m, double x) { return std::cyl_neumann(static_cast<double>(m), x); }
  static double djn(int m, double x) { return m == 0 ? -jn(1, x) : 0.5 * (jn(m - 1, x) - jn(m + 1, x)); }
  static double dyn(int m, double x) { return m == 0 ? -yn(1, x) : 0.5 * (yn(m - 1, x) - yn(m + 1, x)); }
  static mtf::Complex hn(int m, double x) { return {jn(m, x), yn(m, x)}; }
  static mtf::Complex dhn(int m, double x) { return {djn(m, x), dyn(m, x)}; }

  double k0_, k1_, a_;
  std::vector<mtf::Complex> inner_;
  std::vector<mtf::Complex> outer_;
};

inline std::vector<double> logspace(double lo, double hi, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    out[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  }
  return out;
}

}  // namespace oracle

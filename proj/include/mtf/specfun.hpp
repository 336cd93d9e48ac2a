#pragma once

#include <array>

#include "mtf/types.hpp"

/// Cylindrical Bessel functions of order 0 and 1 and the outgoing 2D
/// Helmholtz kernel G(z) = (i/4) H0(kappa |z|), fundamental solution of
/// -Delta - kappa^2.
namespace mtf::specfun {

struct BesselJY {
  double j0;
  double j1;
  double y0;
  double y1;
};

/// J0, J1, Y0, Y1 at x > 0. Throws std::domain_error for x <= 0.
BesselJY bessel_j0j1y0y1(double x);

/// J-only path; defined for every real x (J0 even, J1 odd).
double bessel_j0(double x);
double bessel_j1(double x);

/// Y0(x) - (2/pi) ln(x/2) J0(x), the entire part of Y0. Defined at x = 0.
double bessel_y0_regular(double x);

struct KernelValue {
  Complex g;
  std::array<Complex, 2> grad;  // gradient with respect to x
};

/// Kernel and its x-gradient at x - y. Throws std::domain_error if x == y.
KernelValue green_kernel_2d(double kappa, const Vec2& x, const Vec2& y);

/// G_kappa(r) = log_coeff * ln(r) + smooth, with log_coeff = -J0(kappa r)/(2 pi).
struct LogSplit {
  Complex smooth;
  double log_coeff;
};

LogSplit log_split(double kappa, double r);

}  // namespace mtf::specfun

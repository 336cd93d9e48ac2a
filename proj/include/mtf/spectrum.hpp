#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mtf/types.hpp"

namespace mtf::spectrum {

/// sqrt(rho e^{i theta}) = sqrt(rho) e^{i theta / 2} with theta in (-pi, pi].
Complex principal_sqrt(Complex z);

/// {-1 + alpha + sqrt(1 + alpha^2), -1 + alpha - sqrt(1 + alpha^2)}.
std::array<Complex, 2> predicted_eigenvalues(Complex alpha);

struct EigResult {
  std::vector<Complex> values;
  double max_residual = 0.0;  // max ||O v - lambda v|| / (||O|| ||v||) over the sampled pairs
  int checked = 0;
};

/// All eigenvalues of a dense complex matrix, with an inverse-iteration
/// residual check on `samples` evenly spaced eigenvalues. Throws
/// NumericalError if the QR iteration fails or a residual exceeds 1e-8.
EigResult eig_operator(const CMatrix& o, int samples = 10, std::uint64_t seed = 20240901);

/// Eigenvalues of M^{-1} B with M^{-1} B formed explicitly.
EigResult eig_dense(const CMatrix& b, const CMatrix& m, int samples = 10);

struct SpectrumReport {
  std::vector<Complex> eigenvalues;
  std::array<Complex, 2> predicted{};
  std::vector<double> distances;  // to the nearest predicted point
  double median = 0.0;
  double p90 = 0.0;
  double max = 0.0;
  std::array<double, 3> within{};  // fraction within 0.05, 0.1, 0.2
  double positive_p90 = 0.0;       // p90 over eigenvalues nearest to predicted[0]
  std::array<Complex, 2> medoids{};  // 2-means clusters, ordered by real part (descending)
  std::array<int, 2> cluster_sizes{};

  Complex alpha;
  std::vector<double> kappas;
  double h = 0.0;
  std::string geometry;
};

inline constexpr std::array<double, 3> kClusterRadii{0.05, 0.1, 0.2};

SpectrumReport cluster_report(const std::vector<Complex>& eigs, Complex alpha);

/// Nearest-rank percentile, q in (0, 1]. Median averages the middle pair.
double percentile(std::vector<double> values, double q);
double median(std::vector<double> values);

/// Distances of each value to the nearest of the given points.
std::vector<double> nearest_distances(const std::vector<Complex>& values, const std::vector<Complex>& points);

/// Lloyd 2-means started at the eigenvalues of smallest and largest real
/// part. Returns the medoid of each cluster and the assignment.
struct TwoMeans {
  std::array<Complex, 2> medoids{};
  std::array<int, 2> sizes{};
  std::vector<int> label;
};

TwoMeans two_means(const std::vector<Complex>& values);

std::string eigenvalues_csv(const std::vector<Complex>& eigs);
nlohmann::json report_json(const SpectrumReport& report);

}  // namespace mtf::spectrum

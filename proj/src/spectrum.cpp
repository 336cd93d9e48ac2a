#include "mtf/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include <Eigen/Eigenvalues>

namespace mtf::spectrum {

Complex principal_sqrt(Complex z) {
  const double rho = std::abs(z);
  double theta = std::arg(z);
  if (theta <= -kPi) {
    theta = kPi;
  }
  return std::polar(std::sqrt(rho), 0.5 * theta);
}

std::array<Complex, 2> predicted_eigenvalues(Complex alpha) {
  const Complex root = principal_sqrt(1.0 + alpha * alpha);
  return {-1.0 + alpha + root, -1.0 + alpha - root};
}

EigResult eig_operator(const CMatrix& o, int samples, std::uint64_t seed) {
  EigResult res;
  const Eigen::Index n = o.rows();
  Eigen::ComplexEigenSolver<CMatrix> solver(o, false);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigenvalue QR iteration did not converge");
  }
  res.values.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
  std::sort(res.values.begin(), res.values.end(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });

  const double norm = o.norm();
  if (norm == 0.0 || n == 0) {
    return res;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  const int count = std::min<int>(samples, static_cast<int>(n));
  for (int s = 0; s < count; ++s) {
    const Complex lambda = res.values[static_cast<std::size_t>(s * n / count)];
    CMatrix shifted = o;
    // nudge the shift off the exact eigenvalue so the factorization stays usable
    shifted.diagonal().array() -= lambda + Complex(1e-10 * norm, 0.0);
    Eigen::PartialPivLU<CMatrix> lu(shifted);
    CVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      v[i] = Complex(gauss(rng), gauss(rng));
    }
    v.normalize();
    for (int it = 0; it < 3; ++it) {
      v = lu.solve(v);
      v.normalize();
    }
    const double r = (o * v - lambda * v).norm() / norm;
    res.max_residual = std::max(res.max_residual, r);
    ++res.checked;
  }
  if (!(res.max_residual <= 1e-8)) {
    throw NumericalError("eigenpair residual check failed: " + std::to_string(res.max_residual));
  }
  return res;
}

EigResult eig_dense(const CMatrix& b, const CMatrix& m, int samples) {
  Eigen::PartialPivLU<CMatrix> lu(m);
  if (!(lu.rcond() > 1e-15)) {
    throw NumericalError("duality matrix is singular");
  }
  return eig_operator(lu.solve(b), samples);
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) {
    return 0.0;
  }
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
  return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

double median(std::vector<double> values) {
  if (values.empty()) {
    return 0.0;
  }
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<double> nearest_distances(const std::vector<Complex>& values, const std::vector<Complex>& points) {
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& v : values) {
    double d = INFINITY;
    for (const auto& p : points) {
      d = std::min(d, std::abs(v - p));
    }
    out.push_back(d);
  }
  return out;
}

TwoMeans two_means(const std::vector<Complex>& values) {
  TwoMeans tm;
  const std::size_t n = values.size();
  tm.label.assign(n, 0);
  if (n == 0) {
    return tm;
  }
  auto by_real = [](Complex a, Complex b) { return a.real() < b.real(); };
  std::array<Complex, 2> center{*std::max_element(values.begin(), values.end(), by_real),
                                *std::min_element(values.begin(), values.end(), by_real)};
  for (int it = 0; it < 200; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const int l = std::abs(values[i] - center[0]) <= std::abs(values[i] - center[1]) ? 0 : 1;
      changed = changed || l != tm.label[i] || it == 0;
      tm.label[i] = l;
    }
    std::array<Complex, 2> sum{};
    std::array<int, 2> cnt{};
    for (std::size_t i = 0; i < n; ++i) {
      sum[tm.label[i]] += values[i];
      ++cnt[tm.label[i]];
    }
    for (int c = 0; c < 2; ++c) {
      if (cnt[c] > 0) {
        center[c] = sum[c] / static_cast<double>(cnt[c]);
      }
    }
    if (!changed) {
      break;
    }
  }
  for (int c = 0; c < 2; ++c) {
    double best = INFINITY;
    tm.sizes[c] = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (tm.label[i] != c) {
        continue;
      }
      ++tm.sizes[c];
      double total = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        if (tm.label[k] == c) {
          total += std::abs(values[i] - values[k]);
        }
      }
      if (total < best) {
        best = total;
        tm.medoids[c] = values[i];
      }
    }
  }
  return tm;
}

SpectrumReport cluster_report(const std::vector<Complex>& eigs, Complex alpha) {
  SpectrumReport r;
  r.eigenvalues = eigs;
  r.alpha = alpha;
  r.predicted = predicted_eigenvalues(alpha);
  r.distances = nearest_distances(eigs, {r.predicted[0], r.predicted[1]});
  r.median = median(r.distances);
  r.p90 = percentile(r.distances, 0.9);
  r.max = r.distances.empty() ? 0.0 : *std::max_element(r.distances.begin(), r.distances.end());
  for (std::size_t k = 0; k < kClusterRadii.size(); ++k) {
    const auto inside = std::count_if(r.distances.begin(), r.distances.end(),
                                      [&](double d) { return d <= kClusterRadii[k]; });
    r.within[k] = eigs.empty() ? 0.0 : static_cast<double>(inside) / static_cast<double>(eigs.size());
  }
  std::vector<double> positive;
  for (const auto& e : eigs) {
    const double dp = std::abs(e - r.predicted[0]);
    if (dp <= std::abs(e - r.predicted[1])) {
      positive.push_back(dp);
    }
  }
  r.positive_p90 = percentile(positive, 0.9);
  const auto tm = two_means(eigs);
  r.medoids = tm.medoids;
  r.cluster_sizes = tm.sizes;
  return r;
}

std::string eigenvalues_csv(const std::vector<Complex>& eigs) {
  std::string out = "re,im\n";
  char buf[64];
  for (const auto& e : eigs) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", e.real(), e.imag());
    out += buf;
  }
  return out;
}

namespace {

nlohmann::json complex_json(Complex z) { return nlohmann::json::array({z.real(), z.imag()}); }

}  // namespace

nlohmann::json report_json(const SpectrumReport& r) {
  nlohmann::json j;
  j["geometry"] = r.geometry;
  j["alpha"] = complex_json(r.alpha);
  j["kappas"] = r.kappas;
  j["h"] = r.h;
  j["count"] = r.eigenvalues.size();
  j["predicted"] = {complex_json(r.predicted[0]), complex_json(r.predicted[1])};
  j["distance"] = {{"median", r.median}, {"p90", r.p90}, {"max", r.max}, {"positive_p90", r.positive_p90}};
  nlohmann::json within = nlohmann::json::object();
  for (std::size_t k = 0; k < kClusterRadii.size(); ++k) {
    char key[16];
    std::snprintf(key, sizeof(key), "%g", kClusterRadii[k]);
    within[key] = r.within[k];
  }
  j["within"] = within;
  j["medoids"] = {complex_json(r.medoids[0]), complex_json(r.medoids[1])};
  j["cluster_sizes"] = r.cluster_sizes;
  return j;
}

}  // namespace mtf::spectrum

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "mtf/experiment.hpp"
#include "mtf/specfun.hpp"
#include "oracles.hpp"

using namespace mtf;
using experiment::Problem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

std::string join(const std::vector<double>& v, const char* f = "%.4g") {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    s += (i ? ", " : "") + fmt(f, v[i]);
  }
  return s;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return true;
}

const std::vector<double> kHs{0.2, 0.1, 0.05};

class Problems {
 public:
  const Problem& fig1(double h, std::array<double, 3> k = {1, 1, 1}) {
    return get("fig1", h, k, [&] { return geometry::presets::circle_in_square(k); });
  }
  const Problem& circle(double h) {
    return get("circle", h, {1, 1, 0}, [] { return geometry::presets::two_domain_circle(1, 1); });
  }
  const Problem& gap(double delta, double h) {
    return get("gap" + std::to_string(delta), h, {1, 1, 1}, [&] { return geometry::presets::gap(delta, {1, 1, 1}); });
  }

 private:
  const Problem& get(const std::string& tag, double h, std::array<double, 3> k,
                     const std::function<geometry::PartitionConfig()>& make) {
    const auto key = std::make_tuple(tag, h, k);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      it = cache_.emplace(key, experiment::build_problem(make(), h)).first;
    }
    return it->second;
  }
  std::map<std::tuple<std::string, double, std::array<double, 3>>, Problem> cache_;
};

Problems problems;

spectrum::SpectrumReport report(const Problem& pb, Complex alpha) {
  const auto eig = spectrum::eig_operator(transmission::operator_form(pb.o_a, pb.p, alpha));
  return spectrum::cluster_report(eig.values, alpha);
}

double calderon_median(const Problem& pb) {
  const auto eig = spectrum::eig_operator(pb.o_a);
  return spectrum::median(spectrum::nearest_distances(eig.values, {1.0, -1.0}));
}

Outcome closed_form() {
  auto digits5 = [](Complex z, double ref) { return std::fabs(z.real() - ref) <= 0.5e-4 * std::pow(10.0, std::floor(std::log10(std::fabs(ref)))) && z.imag() == 0.0; };
  const auto a = spectrum::predicted_eigenvalues(0.5);
  const auto b = spectrum::predicted_eigenvalues(-0.25);
  const auto c = spectrum::predicted_eigenvalues(1.0);
  const bool ok = digits5(a[0], 0.61803) && digits5(a[1], -1.6180) && digits5(b[0], -0.21922) &&
                  digits5(b[1], -2.2808) && std::abs(c[0] - std::sqrt(2.0)) < 1e-15 &&
                  std::abs(c[1] + std::sqrt(2.0)) < 1e-15;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "0.5 -> %.6g, %.6g; -0.25 -> %.6g, %.6g; 1 -> %.8g, %.8g", a[0].real(),
                a[1].real(), b[0].real(), b[1].real(), c[0].real(), c[1].real());
  return {ok, buf};
}

Outcome cluster_reproduction() {
  std::vector<double> med;
  double max_at_finest = 0.0;
  int dim = 0;
  for (double h : kHs) {
    const auto r = report(problems.fig1(h), 1.0);
    med.push_back(r.median);
    max_at_finest = r.max;
    dim = static_cast<int>(r.eigenvalues.size());
  }
  const bool dec = strictly_decreasing(med);
  const bool ok = max_at_finest < 0.5 && med.back() < 0.05 && dec;
  return {ok, "dim " + std::to_string(dim) + ", max " + fmt("%.4g", max_at_finest) + ", median over h {0.2, 0.1, 0.05}: " +
                  join(med) + (dec ? "" : " (not decreasing)")};
}

Outcome relaxation_sweep() {
  bool ok = true;
  std::string detail;
  for (double alpha : {0.5, -0.25}) {
    const auto r = report(problems.fig1(0.05), alpha);
    const double e0 = std::abs(r.medoids[0] - r.predicted[0]);
    const double e1 = std::abs(r.medoids[1] - r.predicted[1]);
    ok = ok && e0 < 0.05 && e1 < 0.05;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%salpha %g: medoids %.5f%+.5fi, %.5f%+.5fi (err %.3g, %.3g)", detail.empty() ? "" : "; ",
                  alpha, r.medoids[0].real(), r.medoids[0].imag(), r.medoids[1].real(), r.medoids[1].imag(), e0, e1);
    detail += buf;
  }
  return {ok, detail};
}

Outcome contrast() {
  const auto r = report(problems.fig1(0.05, {1, 5, 2}), 1.0);
  std::size_t near = 0;
  for (double d : r.distances) {
    near += d <= 0.3;
  }
  const double frac = static_cast<double>(near) / static_cast<double>(r.distances.size());
  return {r.max > 0.3 && frac >= 0.5, "max " + fmt("%.4g", r.max) + ", within 0.3: " + fmt("%.3f", frac)};
}

Outcome gap_degradation() {
  std::vector<double> p90;
  for (double delta : {0.1, 0.01, 0.001}) {
    p90.push_back(report(problems.gap(delta, 0.05), 1.0).positive_p90);
  }
  bool inc = true;
  for (std::size_t i = 1; i < p90.size(); ++i) {
    inc = inc && p90[i] > p90[i - 1];
  }
  return {inc, "p90 to +sqrt2 for delta {0.1, 0.01, 0.001}: " + join(p90)};
}

Outcome exact_identities() {
  const Problem& pb = problems.fig1(0.05);
  const CMatrix& m = pb.m;
  const CMatrix pd = pb.p.dense();
  const CMatrix mp = m * pd;
  const CVector u = transmission::plane_wave_traces(pb.dofmap, pb.skeleton, {Vec2(0.6, 0.8), 1.0});
  const CVector v = transmission::plane_wave_traces(pb.dofmap, pb.skeleton, {Vec2(-1, 0), 2.0});
  const std::vector<double> r{
      (m + m.transpose()).norm() / m.norm(),
      (pd * pd - CMatrix::Identity(pd.rows(), pd.cols())).norm() / pd.norm(),
      (mp - mp.transpose()).norm() / mp.norm(),
      std::abs((u.transpose() * m * v).value()) / (u.norm() * m.norm() * v.norm()),
      (pb.p.apply(u) - u).norm() / u.norm()};
  return {*std::max_element(r.begin(), r.end()) <= 1e-13, "M^T=-M, P^2=I, (MP)^T=MP, cancellation, P u=u: " + join(r, "%.2g")};
}

Outcome calderon() {
  std::vector<double> med;
  for (double h : kHs) {
    med.push_back(calderon_median(problems.circle(h)));
  }
  const bool dec = strictly_decreasing(med);
  return {med.back() < 0.05 && dec, "median to {+1,-1} over h {0.2, 0.1, 0.05}: " + join(med) + (dec ? "" : " (not decreasing)")};
}

Outcome nilpotency() {
  std::vector<double> t2, ac2;
  for (double h : kHs) {
    const Problem& pb = problems.fig1(h);
    const auto split = transmission::split_diag(pb.b_a, pb.dofmap);
    const CMatrix ot = assembly::apply_M_inverse(pb.dofmap, pb.skeleton, split.b_t);
    t2.push_back((ot * ot).norm() / ot.squaredNorm());
    const CMatrix ac = pb.p.apply(pb.o_a) + pb.p.right_multiply(pb.o_a);
    ac2.push_back((ac * ac).norm() / ac.squaredNorm());
  }
  const double rt = t2[2] / t2[1];
  const double ra = ac2[2] / ac2[1];
  const bool ok = t2.back() < 0.05 && ac2.back() < 0.05 && rt < 0.7 && ra < 0.7;
  return {ok, "T^2: " + join(t2, "%.3g") + " (ratio " + fmt("%.3f", rt) + "); (PO+OP)^2: " + join(ac2, "%.3g") +
                  " (ratio " + fmt("%.3f", ra) + ")"};
}

Outcome scattering() {
  const double k0 = 1.0, k1 = 2.0;
  const auto pb = experiment::build_problem(geometry::presets::two_domain_circle(k0, k1, 1.0), 0.05);
  auto sys = transmission::assemble_mtf(pb.b_a, pb.m, pb.p, 1.0);
  const transmission::PlaneWave wave{Vec2(1, 0), k0};
  sys.rhs = transmission::assemble_rhs(pb.b_a, pb.m, pb.dofmap, pb.skeleton, wave);
  const auto rep = transmission::solve(sys, {}, pb.dofmap, pb.skeleton);
  const transmission::ScatteringSolution sol(pb.partition, pb.skeleton, pb.dofmap, wave, rep.coeffs);
  const oracle::PenetrableDisk disk(k0, k1, 1.0);
  double worst = 0.0;
  for (double radius : {0.5, 2.0}) {
    for (int k = 0; k < 8; ++k) {
      const double t = 2 * kPi * k / 8 + 0.2;
      const Vec2 x(radius * std::cos(t), radius * std::sin(t));
      const Complex ref = disk.field(x.x(), x.y());
      worst = std::max(worst, std::abs(sol.field(x) - ref) / std::abs(ref));
    }
  }
  return {worst < 0.02, "max relative error over 16 points: " + fmt("%.3g", worst)};
}

Outcome special_functions() {
  double worst = 0.0, wr = 0.0;
  for (double x : oracle::logspace(1e-3, 1e3, 1000)) {
    const auto b = specfun::bessel_j0j1y0y1(x);
    const auto o = oracle::bessel_series(x);
    for (auto [got, ref] : {std::pair{b.j0, o.j0}, {b.j1, o.j1}, {b.y0, o.y0}, {b.y1, o.y1}}) {
      worst = std::max(worst, std::fabs(got - ref) / std::fabs(ref));
    }
    wr = std::max(wr, std::fabs((b.j1 * b.y0 - b.j0 * b.y1) * kPi * x / 2.0 - 1.0));
  }
  return {worst <= 1e-12 && wr <= 1e-11, "max relative error " + fmt("%.3g", worst) + ", Wronskian " + fmt("%.3g", wr)};
}

Outcome uniqueness() {
  const Problem& pb = problems.fig1(0.1);
  bool ok = true;
  std::vector<double> ratios;
  for (Complex alpha : {Complex(1.0), Complex(0.5), Complex(-0.25), Complex(0.0, 1.0)}) {
    const auto sys = transmission::assemble_mtf(pb.b_a, pb.m, pb.p, alpha);
    const Eigen::BDCSVD<CMatrix> svd(sys.b_h);
    const auto& s = svd.singularValues();
    ratios.push_back(s(s.size() - 1) / s(0));
    ok = ok && ratios.back() > 1e-6;
  }
  return {ok, "sigma_min/||B_h|| for alpha {1, 0.5, -0.25, i}: " + join(ratios, "%.3g")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"closed-form spectrum values", closed_form},
      {"cluster reproduction (circle in square)", cluster_reproduction},
      {"relaxation sweep medoids", relaxation_sweep},
      {"contrast case kappa (1, 5, 2)", contrast},
      {"gap degradation", gap_degradation},
      {"exact discrete identities", exact_identities},
      {"Calderon identity on the circle", calderon},
      {"nilpotency residuals", nilpotency},
      {"scattering by a penetrable disk", scattering},
      {"special functions", special_functions},
      {"uniqueness / invertibility", uniqueness},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2zu %-40s %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), sec);
    std::fflush(stdout);
    failures += !o.pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}

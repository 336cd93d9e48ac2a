#include "mtf/transmission.hpp"

#include <cmath>

namespace mtf::transmission {

CVector TransmissionPermutation::apply(const CVector& x) const {
  CVector out(x.size());
  for (int i = 0; i < dimension(); ++i) {
    out[i] = static_cast<double>(sign[i]) * x[target[i]];
  }
  return out;
}

CMatrix TransmissionPermutation::apply(const CMatrix& x) const {
  CMatrix out(x.rows(), x.cols());
  for (int i = 0; i < dimension(); ++i) {
    out.row(i) = static_cast<double>(sign[i]) * x.row(target[i]);
  }
  return out;
}

CMatrix TransmissionPermutation::right_multiply(const CMatrix& x) const {
  // (X P)(:, target[i]) collects sign[i] * X(:, i)
  CMatrix out = CMatrix::Zero(x.rows(), x.cols());
  for (int i = 0; i < dimension(); ++i) {
    out.col(target[i]) += static_cast<double>(sign[i]) * x.col(i);
  }
  return out;
}

CMatrix TransmissionPermutation::dense() const {
  CMatrix out = CMatrix::Zero(dimension(), dimension());
  for (int i = 0; i < dimension(); ++i) {
    out(i, target[i]) = static_cast<double>(sign[i]);
  }
  return out;
}

TransmissionPermutation build_transmission(const assembly::MultiTraceDofMap& dofmap) {
  TransmissionPermutation p;
  p.target.resize(dofmap.dimension);
  p.sign.resize(dofmap.dimension);
  for (int i = 0; i < dofmap.dimension; ++i) {
    const int t = dofmap.partner.at(i);
    if (t < 0 || dofmap.partner.at(t) != i) {
      throw ValidationError("incomplete interface correspondence at coefficient " + std::to_string(i));
    }
    p.target[i] = t;
    p.sign[i] = dofmap.is_neumann[i] ? -1 : 1;
  }
  return p;
}

MtfSystem assemble_mtf(const CMatrix& b_a, const CMatrix& m, const TransmissionPermutation& p, Complex alpha) {
  if (b_a.rows() != m.rows() || b_a.cols() != m.cols() || m.rows() != p.dimension()) {
    throw ValidationError("assemble_mtf: dimension mismatch");
  }
  MtfSystem sys;
  sys.alpha = alpha;
  sys.m = m;
  sys.b_h = b_a - (1.0 - alpha) * m - alpha * p.right_multiply(m);
  sys.rhs = CVector::Zero(m.rows());
  return sys;
}

CMatrix operator_form(const CMatrix& o_a, const TransmissionPermutation& p, Complex alpha) {
  CMatrix out = o_a - alpha * p.dense();
  out.diagonal().array() -= (1.0 - alpha);
  return out;
}

DiagSplit split_diag(const CMatrix& b_a, const assembly::MultiTraceDofMap& dofmap) {
  DiagSplit s;
  s.b_d = CMatrix::Zero(b_a.rows(), b_a.cols());
  for (int i = 0; i < dofmap.dimension; ++i) {
    for (int j = 0; j < dofmap.dimension; ++j) {
      if (dofmap.owner[i] == dofmap.owner[j] && dofmap.curve[i] == dofmap.curve[j]) {
        s.b_d(i, j) = b_a(i, j);
      }
    }
  }
  s.b_t = b_a - s.b_d;
  return s;
}

Complex PlaneWave::value(const Vec2& x) const {
  return amplitude * std::exp(Complex(0.0, kappa * direction.dot(x)));
}

CVector plane_wave_traces(const assembly::MultiTraceDofMap& dofmap, const geometry::SkeletonMesh& skeleton,
                          const PlaneWave& wave, int only_subdomain) {
  if (std::fabs(wave.direction.norm() - 1.0) > 1e-12) {
    throw ValidationError("plane wave direction must be a unit vector");
  }
  CVector u = CVector::Zero(dofmap.dimension);
  for (const auto& block : dofmap.blocks) {
    if (only_subdomain >= 0 && block.subdomain != only_subdomain) {
      continue;
    }
    for (std::size_t ci = 0; ci < block.curves.size(); ++ci) {
      const int c = block.curves[ci];
      const int n = static_cast<int>(skeleton.curve_nodes[c].size());
      for (int i = 0; i < n; ++i) {
        const int node = skeleton.curve_nodes[c][i];
        const int local = block.curve_offset[ci] + i;
        const Vec2& x = skeleton.nodes[node];
        const Vec2 normal = block.curve_signs[ci] * skeleton.nodal_normals[node];
        const Complex v = wave.value(x);
        u[block.dirichlet(local)] = v;
        u[block.neumann(local)] = Complex(0.0, wave.kappa * wave.direction.dot(normal)) * v;
      }
    }
  }
  return u;
}

CVector incident_traces(const assembly::MultiTraceDofMap& dofmap, const geometry::SkeletonMesh& skeleton,
                        const PlaneWave& wave) {
  return plane_wave_traces(dofmap, skeleton, wave, 0);
}

CVector assemble_rhs(const CMatrix& b_a, const CMatrix& m, const assembly::MultiTraceDofMap& dofmap,
                     const geometry::SkeletonMesh& skeleton, const PlaneWave& wave) {
  const CVector u = incident_traces(dofmap, skeleton, wave);
  return b_a * u - m * u;
}

GmresResult gmres(const CMatrix& a, const CVector& b, double tol, int maxit) {
  const Eigen::Index n = b.size();
  GmresResult res;
  res.x = CVector::Zero(n);
  const double beta = b.norm();
  if (beta == 0.0) {
    res.converged = true;
    return res;
  }
  maxit = std::min<int>(maxit, static_cast<int>(n));
  CMatrix v(n, maxit + 1);
  CMatrix h = CMatrix::Zero(maxit + 1, maxit);
  std::vector<Complex> cs(maxit);
  std::vector<Complex> sn(maxit);
  CVector g = CVector::Zero(maxit + 1);
  g[0] = beta;
  v.col(0) = b / beta;
  int k = 0;
  for (; k < maxit; ++k) {
    CVector w = a * v.col(k);
    for (int i = 0; i <= k; ++i) {
      h(i, k) = v.col(i).dot(w);
      w -= h(i, k) * v.col(i);
    }
    h(k + 1, k) = w.norm();
    if (std::abs(h(k + 1, k)) > 0.0) {
      v.col(k + 1) = w / h(k + 1, k);
    }
    for (int i = 0; i < k; ++i) {
      const Complex t = std::conj(cs[i]) * h(i, k) + std::conj(sn[i]) * h(i + 1, k);
      h(i + 1, k) = -sn[i] * h(i, k) + cs[i] * h(i + 1, k);
      h(i, k) = t;
    }
    const double denom = std::hypot(std::abs(h(k, k)), std::abs(h(k + 1, k)));
    cs[k] = denom > 0.0 ? h(k, k) / denom : Complex(1.0);
    sn[k] = denom > 0.0 ? h(k + 1, k) / denom : Complex(0.0);
    h(k, k) = denom;
    h(k + 1, k) = 0.0;
    g[k + 1] = -sn[k] * g[k];
    g[k] = std::conj(cs[k]) * g[k];
    const double rel = std::abs(g[k + 1]) / beta;
    res.history.push_back(rel);
    if (rel < tol) {
      ++k;
      res.converged = true;
      break;
    }
  }
  res.iterations = k;
  if (k > 0) {
    const CVector y = h.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    res.x = v.leftCols(k) * y;
  }
  return res;
}

SolveReport solve(const MtfSystem& system, const SolveOptions& options, const assembly::MultiTraceDofMap& dofmap,
                  const geometry::SkeletonMesh& skeleton) {
  SolveReport rep;
  const double rhs_norm = system.rhs.norm();
  if (options.kind == SolverKind::direct) {
    rep.method = "direct";
    Eigen::PartialPivLU<CMatrix> lu(system.b_h);
    const double rcond = lu.rcond();
    if (!(rcond > 1e-15)) {
      throw NumericalError("system matrix is numerically singular (rcond " + std::to_string(rcond) + ")");
    }
    rep.coeffs = lu.solve(system.rhs);
    rep.iterations = 1;
  } else {
    rep.method = "gmres";
    const CMatrix o = assembly::apply_M_inverse(dofmap, skeleton, system.b_h);
    const CVector f = assembly::apply_M_inverse(dofmap, skeleton, CMatrix(system.rhs));
    auto g = gmres(o, f, options.tol, options.maxit);
    if (!g.converged) {
      throw NumericalError("gmres did not converge within " + std::to_string(options.maxit) + " iterations");
    }
    rep.coeffs = std::move(g.x);
    rep.iterations = g.iterations;
    rep.history = std::move(g.history);
  }
  rep.residual = rhs_norm > 0.0 ? (system.b_h * rep.coeffs - system.rhs).norm() / rhs_norm : 0.0;
  if (options.kind == SolverKind::direct && rep.residual > 1e-10) {
    throw NumericalError("direct solve residual " + std::to_string(rep.residual) + " exceeds 1e-10");
  }
  return rep;
}

ScatteringSolution::ScatteringSolution(geometry::SubdomainPartition partition, geometry::SkeletonMesh skeleton,
                                       assembly::MultiTraceDofMap dofmap, PlaneWave wave, CVector coeffs)
    : partition_(std::move(partition)),
      skeleton_(std::move(skeleton)),
      dofmap_(std::move(dofmap)),
      wave_(wave),
      coeffs_(std::move(coeffs)) {
  if (!coeffs_.allFinite()) {
    throw NumericalError("solution coefficients are not finite");
  }
}

int ScatteringSolution::locate(const Vec2& x) const {
  int best = -1;
  for (std::size_t c = 0; c < partition_.curves.size(); ++c) {
    if (partition_.curves[c].contains(x) &&
        (best < 0 || partition_.curves[c].enclosed_area() < partition_.curves[best].enclosed_area())) {
      best = static_cast<int>(c);
    }
  }
  return best < 0 ? 0 : partition_.interfaces[best].inside;
}

Complex ScatteringSolution::field(const Vec2& x) const {
  const int j = locate(x);
  const auto [u, p] = assembly::subdomain_traces(dofmap_, j, coeffs_);
  const Complex pot = assembly::eval_potential(dofmap_.blocks[j], skeleton_, partition_.kappas[j], u, p, x);
  return j == 0 ? wave_.value(x) + pot : pot;
}

}  // namespace mtf::transmission

#pragma once

#include <string>
#include <vector>

#include "mtf/assembly.hpp"
#include "mtf/geometry.hpp"
#include "mtf/types.hpp"

namespace mtf::transmission {

/// Signed permutation (Px)[i] = sign[i] * x[target[i]]: Dirichlet copies are
/// swapped across each interface, Neumann copies swapped with a sign flip.
struct TransmissionPermutation {
  std::vector<int> target;
  std::vector<int> sign;

  int dimension() const { return static_cast<int>(target.size()); }
  CVector apply(const CVector& x) const;
  CMatrix apply(const CMatrix& x) const;  // P X
  CMatrix right_multiply(const CMatrix& x) const;  // X P
  CMatrix dense() const;
};

TransmissionPermutation build_transmission(const assembly::MultiTraceDofMap& dofmap);

struct MtfSystem {
  CMatrix b_h;  // B_A - (1 - alpha) M - alpha M P
  CMatrix m;
  Complex alpha;
  CVector rhs;
};

MtfSystem assemble_mtf(const CMatrix& b_a, const CMatrix& m, const TransmissionPermutation& p, Complex alpha);

/// Operator form M^{-1} B_h = O_A - (1 - alpha) I - alpha P, built from O_A.
CMatrix operator_form(const CMatrix& o_a, const TransmissionPermutation& p, Complex alpha);

struct DiagSplit {
  CMatrix b_d;  // same-interface sub-blocks of each subdomain block
  CMatrix b_t;  // B_A - B_D
};

DiagSplit split_diag(const CMatrix& b_a, const assembly::MultiTraceDofMap& dofmap);

struct PlaneWave {
  Vec2 direction{1.0, 0.0};
  double kappa = 1.0;
  Complex amplitude{1.0, 0.0};

  Complex value(const Vec2& x) const;
};

/// Nodal interpolant of the traces of a plane wave on every subdomain
/// boundary (or only on Gamma_j when only_subdomain = j).
CVector plane_wave_traces(const assembly::MultiTraceDofMap& dofmap, const geometry::SkeletonMesh& skeleton,
                          const PlaneWave& wave, int only_subdomain = -1);

/// Nodal interpolant of the traces of u_inc on Gamma_0, zero on every other subdomain.
CVector incident_traces(const assembly::MultiTraceDofMap& dofmap, const geometry::SkeletonMesh& skeleton,
                        const PlaneWave& wave);

/// (B_A - M) times the incident trace vector.
CVector assemble_rhs(const CMatrix& b_a, const CMatrix& m, const assembly::MultiTraceDofMap& dofmap,
                     const geometry::SkeletonMesh& skeleton, const PlaneWave& wave);

enum class SolverKind { direct, gmres };

struct SolveOptions {
  SolverKind kind = SolverKind::direct;
  double tol = 1e-8;
  int maxit = 1000;
};

struct SolveReport {
  CVector coeffs;
  double residual = 0.0;  // ||B_h x - rhs|| / ||rhs||
  int iterations = 0;
  std::vector<double> history;  // gmres: relative residual of the operator form per iteration
  std::string method;
};

/// Direct LU with partial pivoting, or unrestarted GMRES on M^{-1} B_h.
/// Throws NumericalError on a singular matrix or gmres stagnation.
SolveReport solve(const MtfSystem& system, const SolveOptions& options, const assembly::MultiTraceDofMap& dofmap,
                  const geometry::SkeletonMesh& skeleton);

struct GmresResult {
  CVector x;
  int iterations = 0;
  std::vector<double> history;
  bool converged = false;
};

GmresResult gmres(const CMatrix& a, const CVector& b, double tol, int maxit);

/// Multi-trace solution together with what is needed to evaluate the total
/// field through the representation formula in each subdomain.
class ScatteringSolution {
 public:
  ScatteringSolution(geometry::SubdomainPartition partition, geometry::SkeletonMesh skeleton,
                     assembly::MultiTraceDofMap dofmap, PlaneWave wave, CVector coeffs);

  const CVector& coefficients() const { return coeffs_; }
  int locate(const Vec2& x) const;
  /// Total field: G^j(gamma^j u) in bounded subdomains, u_inc + G^0(gamma^0 u) outside.
  Complex field(const Vec2& x) const;

 private:
  geometry::SubdomainPartition partition_;
  geometry::SkeletonMesh skeleton_;
  assembly::MultiTraceDofMap dofmap_;
  PlaneWave wave_;
  CVector coeffs_;
};

}  // namespace mtf::transmission

#pragma once

#include <map>
#include <memory>
#include <string>
#include <tuple>
#include <vector>

#include "mtf/geometry.hpp"
#include "mtf/quadrature.hpp"
#include "mtf/types.hpp"

namespace mtf::assembly {

/// Dof layout of one subdomain: Dirichlet coefficients then Neumann
/// coefficients, one per node of Gamma_j. Nodes are grouped by curve.
struct SubdomainDofs {
  int subdomain = 0;
  std::vector<int> nodes;        // skeleton node ids, local order
  std::vector<int> node_curve;   // curve owning each local node
  std::vector<int> curves;       // bounding curves, in local order
  std::vector<int> curve_signs;  // orientation sign of each curve for this subdomain
  std::vector<int> curve_offset; // first local node of each curve
  int offset = 0;                // global index of the first Dirichlet coefficient

  int size() const { return static_cast<int>(nodes.size()); }
  int dirichlet(int local) const { return offset + local; }
  int neumann(int local) const { return offset + size() + local; }
};

struct MultiTraceDofMap {
  std::vector<SubdomainDofs> blocks;
  int dimension = 0;
  /// For each global index, the index carrying the same trace kind on the
  /// same skeleton node in the neighboring subdomain. An involution.
  std::vector<int> partner;
  /// Per global index: subdomain, curve, and whether it is a Neumann coefficient.
  std::vector<int> owner;
  std::vector<int> curve;
  std::vector<bool> is_neumann;
};

MultiTraceDofMap build_dofmap(const geometry::SubdomainPartition& partition, const geometry::SkeletonMesh& skeleton,
                              const std::vector<geometry::BoundaryMesh>& meshes);

/// P1 x P1 mass matrix of one subdomain boundary in its local node order.
Eigen::MatrixXd boundary_mass(const SubdomainDofs& block, const geometry::SkeletonMesh& skeleton);

/// Galerkin matrix of the skew pairing: +mass in the Dirichlet-row /
/// Neumann-column block, -mass in the transposed position. Real, antisymmetric.
CMatrix assemble_duality(const MultiTraceDofMap& dofmap, const geometry::SkeletonMesh& skeleton);

/// Galerkin matrices of the four boundary integral operators between two
/// skeleton curves, with the skeleton orientation. Rows are test nodes of
/// the first curve, columns trial nodes of the second.
struct CurvePairBlock {
  CMatrix single_layer;   // int int G phi_i phi_j
  CMatrix double_layer;   // int int d_{n(y)} G phi_i phi_j
  CMatrix adjoint;        // int int d_{n(x)} G phi_i phi_j
  CMatrix hypersingular;  // int int G (phi_i' phi_j' - kappa^2 n_x.n_y phi_i phi_j)
};

CurvePairBlock assemble_curve_pair(const geometry::SkeletonMesh& skeleton, int test_curve, int trial_curve,
                                   double kappa, const quadrature::PairRules& rules, int threads = 1);

/// Cache of curve-pair blocks keyed by (test curve, trial curve, kappa).
class BlockCache {
 public:
  const CurvePairBlock& get(const geometry::SkeletonMesh& skeleton, int test_curve, int trial_curve, double kappa,
                            const quadrature::PairRules& rules, int threads);

 private:
  std::map<std::tuple<int, int, double>, std::unique_ptr<CurvePairBlock>> blocks_;
};

/// Pairing matrix of the Calderon operator, block diagonal over subdomains:
/// [[2W, 2K'], [2K, -2V]] in (Dirichlet, Neumann) rows and columns.
CMatrix assemble_calderon(const MultiTraceDofMap& dofmap, const geometry::SkeletonMesh& skeleton,
                          const std::vector<double>& kappas, const quadrature::PairRules& rules,
                          BlockCache* cache = nullptr, int threads = 1);

/// M^{-1} X using the per-subdomain block inverse [[0, -Mass^-1], [Mass^-1, 0]].
CMatrix apply_M_inverse(const MultiTraceDofMap& dofmap, const geometry::SkeletonMesh& skeleton, const CMatrix& x);

/// Potential int q G(x-y) + v n_j(y).(grad G)(x-y) over Gamma_j, with P1
/// trace data given in the local node order of the subdomain.
Complex eval_potential(const SubdomainDofs& block, const geometry::SkeletonMesh& skeleton, double kappa,
                       const CVector& dirichlet, const CVector& neumann, const Vec2& x);

/// Local (Dirichlet, Neumann) parts of subdomain j in a global coefficient vector.
std::pair<CVector, CVector> subdomain_traces(const MultiTraceDofMap& dofmap, int j, const CVector& coeffs);

}  // namespace mtf::assembly
